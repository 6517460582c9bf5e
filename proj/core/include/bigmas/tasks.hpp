#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "bigmas/json.hpp"

namespace bigmas::tasks {

enum class TaskKind { Game24, SixFives, TowerOfLondon };

std::string task_name(TaskKind k); // "game24" | "sixfives" | "tol"
bool parse_task_name(const std::string& text, TaskKind& out);

/// One benchmark problem: the raw input, rendered constraint text, the
/// target, and oracle-computed ground-truth metadata.
struct Instance {
    TaskKind kind = TaskKind::Game24;
    Json input;              // game24 {"numbers":[..4..]}, sixfives {"target":t},
                             // tol {"init":pegs,"goal":pegs}
    std::string constraints; // rendered problem statement (render_context output)
    Json target;             // 24 | t | {"goal":pegs,"optimal_length":L}
    std::uint64_t seed = 0;  // per-instance draw seed
    Json oracle;             // ground truth: solvable flag, difficulty, optimal length
};

struct Verdict {
    bool correct = false;
    std::string reason; // which constraint failed; empty when correct
};

/// Draws uniformly from [0, bound) by rejection so results are identical
/// across standard libraries. bound must be positive.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound);

/// Seeded, reproducible instance generation. game24: solvable 4-tuples
/// from [1,13]^4 whose solution count lies within one standard deviation
/// of the mean over a fixed pre-sampled pool. sixfives: targets uniform
/// over the solvable subset of [1,100]. tol: optimal length uniform over
/// 1..8, then a uniform (init, goal) pair at that distance. Throws
/// std::runtime_error("seed-pool-exhausted...") if sampling cannot meet
/// the constraints.
std::vector<Instance> generate_instances(TaskKind kind, int count, std::uint64_t seed);

/// Checks an answer against the instance's constraints. Never throws;
/// malformed answers come back incorrect with a reason. Tower of London
/// answers must use exactly the labeled optimal move count unless
/// relax_tol_optimality is set (then any legal goal-reaching sequence
/// passes).
Verdict verify(const Instance& inst, const std::string& answer,
               bool relax_tol_optimality = false);

/// Independent brute-force ground truth; nullopt = unsolvable.
std::optional<std::string> oracle_solve(const Instance& inst);

/// Deterministic natural-language statement of the problem, its
/// constraints, and the required answer format.
std::string render_context(const Instance& inst);

Json instance_to_json(const Instance& inst);
bool instance_from_json(const Json& doc, Instance& out, std::string& error);

/// JSONL, one instance per line. Loaders throw std::runtime_error on
/// unreadable files or malformed lines.
void save_instances(const std::string& path, const std::vector<Instance>& list);
std::vector<Instance> load_instances(const std::string& path);

namespace game24 {

/// Exhaustive exact-arithmetic search over all five binary tree shapes,
/// operand permutations, and operator assignments.
bool solvable(const std::array<int, 4>& nums);
std::optional<std::string> solve(const std::array<int, 4>& nums);
/// Distinct solving expressions up to commutative reordering of + and *.
int solution_count(const std::array<int, 4>& nums);

struct DifficultyBand {
    double mean = 0;
    double sd = 0;
    double lo = 0;
    double hi = 0;
};
/// Solution-count statistics over a fixed 1000-tuple solvable pool;
/// generation accepts tuples whose count falls in [lo, hi]. Cached.
const DifficultyBand& difficulty_band();

} // namespace game24

namespace sixfives {

/// Targets in [1,100] reachable with exactly six 5s; sorted. Backed by a
/// cached bounded search (factorial operands <= 12, at most 200000
/// distinct values per digit budget).
const std::vector<int>& solvable_targets();
std::optional<std::string> expression_for(int target);

} // namespace sixfives

namespace tol {

inline constexpr std::array<int, 3> kCapacities{3, 2, 1};

/// Pegs hold beads 'r','g','b' bottom-to-top; peg i holds at most
/// kCapacities[i] beads and each bead appears exactly once overall.
struct State {
    std::array<std::string, 3> pegs;
    bool operator==(const State&) const = default;
    bool operator<(const State& o) const { return pegs < o.pegs; }
};

struct Move {
    int from = 0; // 1-based peg numbers
    int to = 0;
};

struct MoveOutcome {
    bool ok = false;
    std::string error; // "empty-source" | "capacity-exceeded" | "bad-peg"
    State state;
};
MoveOutcome apply_move(const State& s, Move m);

/// All 36 legal placements, in a fixed deterministic order.
const std::vector<State>& enumerate_states();

/// Minimum move count between two states (BFS on the full state graph).
int distance(const State& a, const State& b);
std::vector<Move> shortest_path(const State& a, const State& b);

std::string state_text(const State& s); // fixed-format peg diagram
Json state_to_json(const State& s);
bool state_from_json(const Json& doc, State& out);

/// Accepts a JSON list of [from,to] pairs (bare, fenced, or wrapped in a
/// {"moves": ...} object) or free text with "move X to Y" phrases.
bool parse_moves(const std::string& answer, std::vector<Move>& out, std::string& error);

} // namespace tol

} // namespace bigmas::tasks
