#pragma once

#include "vlp/gsm.hpp"
#include "vlp/lexicon.hpp"
#include "vlp/proof.hpp"

#include <boost/random/mersenne_twister.hpp>

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace vlp {

using Rng = boost::random::mt19937_64;

enum class Structural { Base, WithAxiom, WithTree, WithMultipleTrees };
enum class Overlap { None, Entity, Agent, Both };

std::string to_string(Structural s);
std::string to_string(Overlap o);
Structural structural_from(const std::string& s);
Overlap overlap_from(const std::string& s);
int distractor_count(Structural s);

struct GenConfig {
    std::vector<double> depth_weights = {1, 1, 1};  // D = 1, 2, 3
    std::vector<double> cardinality_weights = {3, 1, 1, 1};  // |A| = 1..4
    std::vector<double> distractor_depth_weights = {1, 1};  // D = 0, 1
    int k_max = 4;
    int qty_min = 1;
    int qty_max = 100;
    int retry_cap = 1000;
    std::size_t max_hyperedges = 13;
    bool verify = true;  // run the exact shortest-proof check on every instance
    std::vector<Structural> modes = {Structural::WithAxiom, Structural::WithTree, Structural::WithMultipleTrees};
    std::uint64_t seed = 1;
    int n_base = 10;
    Lexicon lexicon;
};

struct ResampleSignal : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Distractor {
    Atom goal;
    std::vector<Atom> axioms;
    ProofForest proof;
};

struct ProblemInstance {
    std::string id;
    Structural structural = Structural::Base;
    std::optional<Overlap> overlap;
    bool is_control = false;
    std::optional<std::string> control_of;
    Atom goal;
    std::vector<Atom> relevant_axioms;
    ProofForest shortest_proof;
    std::vector<Distractor> irrelevant;
    std::vector<Atom> presentation_order;
    Nat horizon = 0;
    int depth = 0;
    std::uint64_t seed = 0;

    std::vector<Atom> all_axioms() const;
    std::vector<Atom> irrelevant_axioms() const;
};

Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0);

// Names already taken by a set of atoms.
struct UsedNames {
    std::set<std::string> agents;
    std::set<std::string> entities;
    void add(const Atom& a);
};

int sample_depth(const GenConfig& cfg, Rng& rng);
Atom sample_goal(const GenConfig& cfg, int depth, Rng& rng, const UsedNames& used = {});

struct SampleOptions {
    bool singleton_cont = false;  // distractor restriction
    bool allow_rate = true;
};

// Backward sampler over the rule set. Throws ResampleSignal when the retry cap is exhausted.
ProofForest sample_shortest_proof(const GenConfig& cfg, const Atom& goal, const std::set<Atom>& forbidden, int depth,
                                  Rng& rng, const SampleOptions& so = {}, const UsedNames& taken = {});

// Base problem with a sampled goal and depth.
ProblemInstance generate_base(const GenConfig& cfg, Rng& rng);

ProblemInstance inject_irrelevant(const ProblemInstance& base, Structural mode, Overlap overlap,
                                  const GenConfig& cfg, Rng& rng);

ProblemInstance make_control(const ProblemInstance& base, std::size_t target_axiom_count, const GenConfig& cfg,
                             Rng& rng);

// Random linear extension of the temporal constraint: among axioms sharing
// an entity, (timestamp, is_transfer) never decreases.
std::vector<Atom> order_axioms(const std::vector<Atom>& axioms, Rng& rng);
bool respects_time_order(const std::vector<Atom>& order);

struct InstanceCheck {
    bool ok = true;
    std::string why;
};
// Numerical consistency, uniqueness of the shortest proof, and the exact
// irrelevant set, all over the bounded closure.
InstanceCheck verify_instance(const ProblemInstance& inst, const GsmRuleSet& rs);

struct DatasetStats {
    std::size_t base_rejections = 0;
    std::size_t variant_rejections = 0;
};

// Base problems, then per structural mode four overlap variants and one
// control each. Deterministic in cfg.seed.
std::vector<ProblemInstance> generate_dataset(const GenConfig& cfg, DatasetStats* stats = nullptr);

// One base index with all of its variants; generate_dataset concatenates these.
std::vector<ProblemInstance> generate_group(const GenConfig& cfg, int index, DatasetStats* stats = nullptr);

}  // namespace vlp
