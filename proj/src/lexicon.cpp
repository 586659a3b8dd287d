#include "vlp/lexicon.hpp"

#include "vlp/gsm.hpp"

#include <boost/algorithm/string.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace vlp {

Lexicon Lexicon::load(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read lexicon file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

Lexicon Lexicon::parse(const std::string& text)
{
    Lexicon lx;
    std::istringstream in(text);
    std::string line, section;
    std::set<std::string> nouns;
    auto noun = [&](const std::string& item) {
        auto colon = item.find(':');
        std::string s = boost::trim_copy(item.substr(0, colon));
        std::string p = colon == std::string::npos ? s + "s" : boost::trim_copy(item.substr(colon + 1));
        if (s.empty()) throw ConfigError("empty noun in lexicon");
        if (!nouns.insert(s).second) throw ConfigError("noun listed twice in lexicon: " + s);
        lx.plurals[s] = p;
        return s;
    };
    while (std::getline(in, line)) {
        boost::trim(line);
        if (line.empty() || line[0] == '#') continue;
        if (line.front() == '[' && line.back() == ']') {
            section = line.substr(1, line.size() - 2);
            continue;
        }
        std::vector<std::string> items;
        boost::split(items, line, boost::is_any_of(","));
        for (auto& it : items) boost::trim(it);
        items.erase(std::remove(items.begin(), items.end(), std::string()), items.end());
        if (section == "agents") {
            for (auto& n : items) lx.agents.push_back(boost::to_lower_copy(n));
        } else if (section == "topics") {
            std::vector<std::string> c;
            for (auto& it : items) {
                c.push_back(noun(it));
                lx.cluster_of[c.back()] = static_cast<int>(lx.clusters.size());
            }
            lx.clusters.push_back(std::move(c));
        } else if (section == "containers") {
            for (auto& it : items) lx.containers.push_back(noun(it));
        } else if (section == "suffixes") {
            for (auto& it : items) lx.suffixes.push_back(it);
        } else {
            throw ConfigError("lexicon line outside a known section: " + line);
        }
    }
    std::set<std::string> a(lx.agents.begin(), lx.agents.end());
    if (a.size() != lx.agents.size()) throw ConfigError("duplicate agent names in lexicon");
    for (const auto& n : lx.agents)
        if (nouns.count(n) || gsm_signature().has_predicate(n)) throw ConfigError("agent name clashes: " + n);
    if (lx.agents.empty() || lx.clusters.empty()) throw ConfigError("lexicon needs agents and topics");
    return lx;
}

const std::string& Lexicon::plural(const std::string& singular) const
{
    auto it = plurals.find(singular);
    if (it == plurals.end()) throw ConfigError("noun missing from lexicon: " + singular);
    return it->second;
}

bool Lexicon::is_container(const std::string& e) const
{
    return std::find(containers.begin(), containers.end(), e) != containers.end();
}

std::vector<std::string> Lexicon::topic_entities() const
{
    std::vector<std::string> out;
    for (const auto& c : clusters) out.insert(out.end(), c.begin(), c.end());
    return out;
}

}  // namespace vlp
