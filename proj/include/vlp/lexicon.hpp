#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

namespace vlp {

// Sections: [agents] names, [topics] one cluster per line as
// "sing:plur, sing:plur", [containers] same shape, [suffixes] e.g. 's_student.
struct Lexicon {
    std::vector<std::string> agents;
    std::vector<std::vector<std::string>> clusters;  // singular forms
    std::vector<std::string> containers;
    std::vector<std::string> suffixes;
    std::map<std::string, std::string> plurals;
    std::map<std::string, int> cluster_of;

    static Lexicon load(const std::string& path);
    static Lexicon parse(const std::string& text);

    const std::string& plural(const std::string& singular) const;
    bool is_container(const std::string& e) const;
    std::vector<std::string> topic_entities() const;
};

}  // namespace vlp
