// Benchmark tasks: generation, rendering, verification, and brute-force
// oracles for the 24 game, the six-fives puzzle, and Tower of London.

#include "bigmas/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <stdexcept>

#include "bigmas/expression.hpp"
#include "bigmas/text_scan.hpp"

namespace bigmas::tasks {

namespace {
constexpr std::int64_t kMagnitudeLimit = 1'000'000'000'000'000'000LL;
}

std::string task_name(TaskKind k) {
    switch (k) {
    case TaskKind::Game24: return "game24";
    case TaskKind::SixFives: return "sixfives";
    case TaskKind::TowerOfLondon: return "tol";
    }
    return "game24";
}

bool parse_task_name(const std::string& text, TaskKind& out) {
    if (text == "game24") { out = TaskKind::Game24; return true; }
    if (text == "sixfives") { out = TaskKind::SixFives; return true; }
    if (text == "tol") { out = TaskKind::TowerOfLondon; return true; }
    return false;
}

std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("uniform_below: bound must be positive");
    // Rejection sampling; std:: distributions vary across standard
    // libraries, and generated instances must be stable everywhere.
    const std::uint64_t usable = UINT64_MAX - UINT64_MAX % bound;
    for (;;) {
        std::uint64_t v = rng();
        if (v < usable) return v % bound;
    }
}

// ---------------------------------------------------------------------------
// Game24 oracle

namespace game24 {
namespace {

/// A partially built expression: exact value, printable form, and a
/// canonical form where the operands of + and * are sorted so that
/// commutative rewrites collapse to one string.
struct Cand {
    Rational v;
    std::string plain;
    std::string canon;
};

std::optional<Cand> combine(char op, const Cand& a, const Cand& b) {
    std::optional<Rational> r;
    switch (op) {
    case '+': r = rational::add(a.v, b.v, kMagnitudeLimit); break;
    case '-': r = rational::sub(a.v, b.v, kMagnitudeLimit); break;
    case '*': r = rational::mul(a.v, b.v, kMagnitudeLimit); break;
    case '/':
        if (b.v.num == 0) return std::nullopt;
        r = rational::div(a.v, b.v, kMagnitudeLimit);
        break;
    }
    if (!r) return std::nullopt;

    Cand out;
    out.v = *r;
    out.plain = "(" + a.plain + op + b.plain + ")";
    if (op == '+' || op == '*') {
        const std::string& lo = a.canon <= b.canon ? a.canon : b.canon;
        const std::string& hi = a.canon <= b.canon ? b.canon : a.canon;
        out.canon = "(" + lo + op + hi + ")";
    } else {
        out.canon = "(" + a.canon + op + b.canon + ")";
    }
    return out;
}

/// Calls visit for every expression over the four numbers (all operand
/// permutations, the five association shapes, all operator choices).
/// visit returning true stops the walk.
template <typename F>
void walk_expressions(const std::array<int, 4>& nums, F&& visit) {
    static constexpr char kOps[] = {'+', '-', '*', '/'};
    std::array<int, 4> p = nums;
    std::sort(p.begin(), p.end());
    do {
        std::array<Cand, 4> leaf;
        for (int i = 0; i < 4; ++i) {
            std::string tok = std::to_string(p[i]);
            leaf[i] = Cand{Rational{p[i], 1}, tok, tok};
        }
        const Cand &A = leaf[0], &B = leaf[1], &C = leaf[2], &D = leaf[3];

        // ((A B) C) D
        for (char o0 : kOps) {
            auto ab = combine(o0, A, B);
            if (!ab) continue;
            for (char o1 : kOps) {
                auto abc = combine(o1, *ab, C);
                if (!abc) continue;
                for (char o2 : kOps)
                    if (auto r = combine(o2, *abc, D); r && visit(*r)) return;
            }
        }
        // (A (B C)) D
        for (char o1 : kOps) {
            auto bc = combine(o1, B, C);
            if (!bc) continue;
            for (char o0 : kOps) {
                auto abc = combine(o0, A, *bc);
                if (!abc) continue;
                for (char o2 : kOps)
                    if (auto r = combine(o2, *abc, D); r && visit(*r)) return;
            }
        }
        // (A B) (C D)
        for (char o0 : kOps) {
            auto ab = combine(o0, A, B);
            if (!ab) continue;
            for (char o2 : kOps) {
                auto cd = combine(o2, C, D);
                if (!cd) continue;
                for (char o1 : kOps)
                    if (auto r = combine(o1, *ab, *cd); r && visit(*r)) return;
            }
        }
        // A ((B C) D)
        for (char o1 : kOps) {
            auto bc = combine(o1, B, C);
            if (!bc) continue;
            for (char o2 : kOps) {
                auto bcd = combine(o2, *bc, D);
                if (!bcd) continue;
                for (char o0 : kOps)
                    if (auto r = combine(o0, A, *bcd); r && visit(*r)) return;
            }
        }
        // A (B (C D))
        for (char o2 : kOps) {
            auto cd = combine(o2, C, D);
            if (!cd) continue;
            for (char o1 : kOps) {
                auto bcd = combine(o1, B, *cd);
                if (!bcd) continue;
                for (char o0 : kOps)
                    if (auto r = combine(o0, A, *bcd); r && visit(*r)) return;
            }
        }
    } while (std::next_permutation(p.begin(), p.end()));
}

const Rational kTarget{24, 1};

} // namespace

bool solvable(const std::array<int, 4>& nums) { return solve(nums).has_value(); }

std::optional<std::string> solve(const std::array<int, 4>& nums) {
    std::optional<std::string> found;
    walk_expressions(nums, [&](const Cand& c) {
        if (!(c.v == kTarget)) return false;
        found = c.plain;
        return true;
    });
    return found;
}

int solution_count(const std::array<int, 4>& nums) {
    std::set<std::string> canon;
    walk_expressions(nums, [&](const Cand& c) {
        if (c.v == kTarget) canon.insert(c.canon);
        return false;
    });
    return static_cast<int>(canon.size());
}

const DifficultyBand& difficulty_band() {
    static const DifficultyBand band = [] {
        // The pool seed is a fixed constant: the band is part of the
        // generator's definition, not of any particular run.
        std::mt19937_64 rng(0xb16a5eedULL);
        std::vector<int> counts;
        counts.reserve(1000);
        while (counts.size() < 1000) {
            std::array<int, 4> nums;
            for (int& n : nums) n = static_cast<int>(uniform_below(rng, 13)) + 1;
            int c = solution_count(nums);
            if (c > 0) counts.push_back(c);
        }
        double mean = 0;
        for (int c : counts) mean += c;
        mean /= static_cast<double>(counts.size());
        double var = 0;
        for (int c : counts) var += (c - mean) * (c - mean);
        var /= static_cast<double>(counts.size());
        double sd = std::sqrt(var);
        return DifficultyBand{mean, sd, mean - sd, mean + sd};
    }();
    return band;
}

} // namespace game24

// ---------------------------------------------------------------------------
// Six fives oracle

namespace sixfives {
namespace {

constexpr std::int64_t kFactorialCap = 12; // operand cap inside the search
constexpr std::size_t kSetCap = 200000;    // distinct values per digit budget

/// Appends a postfix operator, re-parenthesizing when the operand already
/// ends in '!' (otherwise "5!"+"!!" would read back as (5!!)!).
std::string with_postfix(const std::string& operand, const char* suffix) {
    if (!operand.empty() && operand.back() == '!')
        return "(" + operand + ")" + suffix;
    return operand + suffix;
}

struct Table {
    // reachable[k]: exact value -> one witness expression using exactly k fives.
    std::array<std::map<Rational, std::string>, 7> reachable;
    std::vector<int> targets;             // solvable subset of [1,100], sorted
    std::map<int, std::string> witnesses; // target -> expression
};

void close_under_postfix(std::map<Rational, std::string>& set) {
    std::deque<Rational> work;
    for (const auto& [v, expr] : set) work.push_back(v);
    while (!work.empty()) {
        Rational v = work.front();
        work.pop_front();
        if (!v.is_integer() || v.num < 0 || v.num > kFactorialCap) continue;
        std::string base = set.at(v);
        if (auto f = rational::factorial(v.num, kFactorialCap, kMagnitudeLimit)) {
            Rational fv{*f, 1};
            if (set.size() < kSetCap && set.emplace(fv, with_postfix(base, "!")).second)
                work.push_back(fv);
        }
        if (auto df = rational::double_factorial(v.num, kFactorialCap, kMagnitudeLimit)) {
            Rational dv{*df, 1};
            if (set.size() < kSetCap && set.emplace(dv, with_postfix(base, "!!")).second)
                work.push_back(dv);
        }
    }
}

const Table& table() {
    static const Table t = [] {
        Table out;
        auto& V = out.reachable;

        for (int k = 1; k <= 6; ++k) {
            // The concatenated literal 5...5 with k digits.
            std::string atom(static_cast<std::size_t>(k), '5');
            V[k].emplace(Rational{std::stoll(atom), 1}, atom);

            // Binary closure over smaller digit budgets. Iterating lo up to
            // k/2 with both operand orders covers every ordered pair once.
            for (int lo = 1; lo * 2 <= k; ++lo) {
                int hi = k - lo;
                for (const auto& [va, ea] : V[lo]) {
                    for (const auto& [vb, eb] : V[hi]) {
                        auto put = [&](std::optional<Rational> v, const std::string& l,
                                       char op, const std::string& r) {
                            if (!v || V[k].size() >= kSetCap) return;
                            V[k].emplace(*v, "(" + l + op + r + ")");
                        };
                        put(rational::add(va, vb, kMagnitudeLimit), ea, '+', eb);
                        put(rational::mul(va, vb, kMagnitudeLimit), ea, '*', eb);
                        put(rational::sub(va, vb, kMagnitudeLimit), ea, '-', eb);
                        put(rational::sub(vb, va, kMagnitudeLimit), eb, '-', ea);
                        if (vb.num != 0)
                            put(rational::div(va, vb, kMagnitudeLimit), ea, '/', eb);
                        if (va.num != 0)
                            put(rational::div(vb, va, kMagnitudeLimit), eb, '/', ea);
                    }
                }
            }
            close_under_postfix(V[k]);
        }

        for (int t2 = 1; t2 <= 100; ++t2) {
            auto it = V[6].find(Rational{t2, 1});
            if (it == V[6].end()) continue;
            out.targets.push_back(t2);
            out.witnesses.emplace(t2, it->second);
        }
        return out;
    }();
    return t;
}

} // namespace

const std::vector<int>& solvable_targets() { return table().targets; }

std::optional<std::string> expression_for(int target) {
    const auto& w = table().witnesses;
    auto it = w.find(target);
    if (it == w.end()) return std::nullopt;
    return it->second;
}

} // namespace sixfives

// ---------------------------------------------------------------------------
// Tower of London

namespace tol {
namespace {

struct Tables {
    std::vector<State> states;          // all 36
    std::map<State, int> index;
    std::vector<std::vector<int>> dist; // BFS all pairs
};

std::vector<std::pair<Move, State>> legal_moves(const State& s) {
    std::vector<std::pair<Move, State>> out;
    for (int from = 0; from < 3; ++from) {
        if (s.pegs[from].empty()) continue;
        for (int to = 0; to < 3; ++to) {
            if (to == from) continue;
            if (static_cast<int>(s.pegs[to].size()) >= kCapacities[to]) continue;
            State next = s;
            char bead = next.pegs[from].back();
            next.pegs[from].pop_back();
            next.pegs[to].push_back(bead);
            out.push_back({Move{from + 1, to + 1}, std::move(next)});
        }
    }
    return out;
}

const Tables& tables() {
    static const Tables t = [] {
        Tables out;
        out.states = enumerate_states();
        const int n = static_cast<int>(out.states.size());
        for (int i = 0; i < n; ++i) out.index.emplace(out.states[i], i);

        out.dist.assign(n, std::vector<int>(n, -1));
        for (int start = 0; start < n; ++start) {
            auto& d = out.dist[start];
            d[start] = 0;
            std::deque<int> frontier{start};
            while (!frontier.empty()) {
                int cur = frontier.front();
                frontier.pop_front();
                for (const auto& [mv, next] : legal_moves(out.states[cur])) {
                    int ni = out.index.at(next);
                    if (d[ni] == -1) {
                        d[ni] = d[cur] + 1;
                        frontier.push_back(ni);
                    }
                }
            }
        }
        return out;
    }();
    return t;
}

} // namespace

MoveOutcome apply_move(const State& s, Move m) {
    if (m.from < 1 || m.from > 3 || m.to < 1 || m.to > 3 || m.from == m.to)
        return {false, "bad-peg", s};
    int from = m.from - 1, to = m.to - 1;
    if (s.pegs[from].empty()) return {false, "empty-source", s};
    if (static_cast<int>(s.pegs[to].size()) >= kCapacities[to])
        return {false, "capacity-exceeded", s};
    State next = s;
    char bead = next.pegs[from].back();
    next.pegs[from].pop_back();
    next.pegs[to].push_back(bead);
    return {true, "", std::move(next)};
}

const std::vector<State>& enumerate_states() {
    static const std::vector<State> states = [] {
        std::vector<State> out;
        // Occupancy counts per peg, then every ordering of the three beads.
        for (int n0 = 0; n0 <= kCapacities[0]; ++n0) {
            for (int n1 = 0; n1 <= kCapacities[1]; ++n1) {
                int n2 = 3 - n0 - n1;
                if (n2 < 0 || n2 > kCapacities[2]) continue;
                std::string beads = "bgr";
                std::sort(beads.begin(), beads.end());
                do {
                    State s;
                    s.pegs[0] = beads.substr(0, n0);
                    s.pegs[1] = beads.substr(n0, n1);
                    s.pegs[2] = beads.substr(n0 + n1, n2);
                    out.push_back(std::move(s));
                } while (std::next_permutation(beads.begin(), beads.end()));
            }
        }
        return out;
    }();
    return states;
}

int distance(const State& a, const State& b) {
    const Tables& t = tables();
    auto ia = t.index.find(a), ib = t.index.find(b);
    if (ia == t.index.end() || ib == t.index.end()) return -1;
    return t.dist[ia->second][ib->second];
}

std::vector<Move> shortest_path(const State& a, const State& b) {
    if (a == b) return {};
    // BFS with parent tracking; ties resolve by legal_moves order, so the
    // result is deterministic.
    std::map<State, std::pair<State, Move>> parent;
    std::deque<State> frontier{a};
    std::set<State> seen{a};
    while (!frontier.empty()) {
        State cur = frontier.front();
        frontier.pop_front();
        for (const auto& [mv, next] : legal_moves(cur)) {
            if (!seen.insert(next).second) continue;
            parent.emplace(next, std::make_pair(cur, mv));
            if (next == b) {
                std::vector<Move> path;
                State at = b;
                while (!(at == a)) {
                    auto& [prev, pm] = parent.at(at);
                    path.push_back(pm);
                    at = prev;
                }
                std::reverse(path.begin(), path.end());
                return path;
            }
            frontier.push_back(next);
        }
    }
    return {}; // unreachable: the state graph is connected
}

std::string state_text(const State& s) {
    std::string out;
    for (int i = 0; i < 3; ++i) {
        out += "peg " + std::to_string(i + 1) + " (capacity " +
               std::to_string(kCapacities[i]) + "): ";
        if (s.pegs[i].empty()) {
            out += "empty";
        } else {
            for (std::size_t j = 0; j < s.pegs[i].size(); ++j) {
                if (j) out += ' ';
                out += s.pegs[i][j];
            }
        }
        out += '\n';
    }
    return out;
}

Json state_to_json(const State& s) {
    Json pegs = Json::array();
    for (const auto& peg : s.pegs) {
        Json beads = Json::array();
        for (char b : peg) beads.push_back(std::string(1, b));
        pegs.push_back(beads);
    }
    return pegs;
}

bool state_from_json(const Json& doc, State& out) {
    if (!doc.is_array() || doc.size() != 3) return false;
    State s;
    std::string seen;
    for (int i = 0; i < 3; ++i) {
        if (!doc[i].is_array() ||
            static_cast<int>(doc[i].size()) > kCapacities[i])
            return false;
        for (const auto& bead : doc[i]) {
            if (!bead.is_string() || bead.get<std::string>().size() != 1) return false;
            char c = bead.get<std::string>()[0];
            if (c != 'r' && c != 'g' && c != 'b') return false;
            s.pegs[i] += c;
            seen += c;
        }
    }
    std::sort(seen.begin(), seen.end());
    if (seen != "bgr") return false;
    out = std::move(s);
    return true;
}

bool parse_moves(const std::string& answer, std::vector<Move>& out, std::string& error) {
    out.clear();
    auto from_json = [&](const Json& doc) -> bool {
        const Json* arr = nullptr;
        if (doc.is_array()) arr = &doc;
        else if (doc.is_object() && doc.contains("moves") && doc["moves"].is_array())
            arr = &doc["moves"];
        if (!arr) {
            error = "JSON answer is neither a move list nor an object with a 'moves' list";
            return false;
        }
        for (const auto& item : *arr) {
            if (!item.is_array() || item.size() != 2 || !item[0].is_number_integer() ||
                !item[1].is_number_integer()) {
                error = "each move must be a [from, to] pair of peg numbers";
                return false;
            }
            int f = item[0].get<int>(), t = item[1].get<int>();
            if (f < 1 || f > 3 || t < 1 || t > 3 || f == t) {
                error = "move [" + std::to_string(f) + ", " + std::to_string(t) +
                        "] is not a valid peg pair";
                return false;
            }
            out.push_back({f, t});
        }
        return true;
    };

    std::string trimmed = trim_copy(answer);
    Json whole = Json::parse(trimmed, nullptr, false);
    if (!whole.is_discarded() && (whole.is_array() || whole.is_object()))
        return from_json(whole);

    for (const auto& block : fenced_blocks(answer)) {
        Json doc = Json::parse(block, nullptr, false);
        if (!doc.is_discarded() && (doc.is_array() || doc.is_object()))
            return from_json(doc);
    }

    static const std::regex kMovePattern(R"(move\s*([1-3])\s*to\s*([1-3]))",
                                         std::regex::icase);
    auto begin = std::sregex_iterator(answer.begin(), answer.end(), kMovePattern);
    for (auto it = begin; it != std::sregex_iterator(); ++it) {
        int f = (*it)[1].str()[0] - '0';
        int t = (*it)[2].str()[0] - '0';
        if (f == t) {
            error = "move " + std::to_string(f) + " to " + std::to_string(t) +
                    " names the same peg twice";
            return false;
        }
        out.push_back({f, t});
    }
    if (out.empty()) {
        error = "no moves found (expected JSON [from,to] pairs or 'move X to Y' lines)";
        return false;
    }
    return true;
}

} // namespace tol

// ---------------------------------------------------------------------------
// Rendering

namespace {

std::string join_numbers(const Json& numbers) {
    std::string out;
    for (std::size_t i = 0; i < numbers.size(); ++i) {
        if (i > 0) out += (i + 1 == numbers.size()) ? " and " : ", ";
        out += std::to_string(numbers[i].get<int>());
    }
    return out;
}

} // namespace

std::string render_context(const Instance& inst) {
    switch (inst.kind) {
    case TaskKind::Game24: {
        std::string nums = join_numbers(inst.input["numbers"]);
        return "Problem: using the numbers " + nums +
               ", write one arithmetic expression that equals exactly 24.\n"
               "Constraints:\n"
               "- use each given number exactly once\n"
               "- allowed: the binary operators +, -, *, / and parentheses\n"
               "- no digit concatenation, factorials, or unary minus\n"
               "- intermediate results may be fractions\n"
               "Answer with the expression only.\n";
    }
    case TaskKind::SixFives: {
        int t = inst.input["target"].get<int>();
        return "Problem: write one arithmetic expression that equals exactly " +
               std::to_string(t) + " using the digit 5 exactly six times.\n"
               "Constraints:\n"
               "- 5 is the only digit allowed, and exactly six 5s must appear\n"
               "- 5s may be concatenated into longer literals such as 55 or 555\n"
               "- allowed operators: +, -, *, /, factorial (!), double factorial (!!), "
               "and parentheses\n"
               "- n!! multiplies n, n-2, n-4, ... down to 1 or 2\n"
               "Answer with the expression only.\n";
    }
    case TaskKind::TowerOfLondon: {
        tol::State init, goal;
        tol::state_from_json(inst.input["init"], init);
        tol::state_from_json(inst.input["goal"], goal);
        return "Problem: Tower of London. Three pegs with capacities 3, 2 and 1 hold "
               "three beads r, g and b. A move takes the topmost bead of one peg and "
               "places it on another peg that still has free capacity. Beads are listed "
               "bottom to top.\n"
               "Initial configuration:\n" + tol::state_text(init) +
               "Goal configuration:\n" + tol::state_text(goal) +
               "Reach the goal configuration in the minimum possible number of moves.\n"
               "Answer with the move list as JSON [from, to] peg pairs, e.g. "
               "[[1, 3], [2, 1]] moves a bead from peg 1 to peg 3, then from peg 2 to "
               "peg 1.\n";
    }
    }
    return "";
}

// ---------------------------------------------------------------------------
// Verification

namespace {

/// Pulls a parseable expression out of an answer that may carry prose:
/// tries the whole text, then lines from last to first. An "ANSWER:"
/// prefix is dropped first.
ExprPtr extract_expression(const std::string& answer, std::string& why) {
    auto try_one = [&](std::string text) -> ExprPtr {
        text = trim_copy(text);
        std::string lowered = to_lower_copy(text);
        if (lowered.rfind("answer:", 0) == 0) text = trim_copy(text.substr(7));
        if (text.empty()) return nullptr;
        auto parsed = parse_expression(text);
        if (parsed.ok()) return parsed.expr;
        if (why.empty()) why = parsed.error;
        return nullptr;
    };

    if (ExprPtr e = try_one(answer)) return e;
    std::vector<std::string> lines;
    std::size_t pos = 0;
    while (pos <= answer.size()) {
        std::size_t eol = answer.find('\n', pos);
        lines.push_back(answer.substr(pos, eol == std::string::npos ? eol : eol - pos));
        if (eol == std::string::npos) break;
        pos = eol + 1;
    }
    for (auto it = lines.rbegin(); it != lines.rend(); ++it)
        if (ExprPtr e = try_one(*it)) return e;
    return nullptr;
}

Verdict verify_game24(const Instance& inst, const std::string& answer) {
    std::string why;
    ExprPtr expr = extract_expression(answer, why);
    if (!expr) return {false, "unparseable expression: " + (why.empty() ? answer : why)};
    if (!uses_only_binary_ops(*expr))
        return {false, "only +, -, * and / with parentheses are allowed"};

    std::vector<std::int64_t> used = literal_values(*expr);
    std::vector<std::int64_t> expected;
    for (const auto& n : inst.input["numbers"]) expected.push_back(n.get<std::int64_t>());
    std::sort(used.begin(), used.end());
    std::sort(expected.begin(), expected.end());
    if (used != expected) {
        auto list = [](const std::vector<std::int64_t>& v) {
            std::string s;
            for (std::size_t i = 0; i < v.size(); ++i)
                s += (i ? ", " : "") + std::to_string(v[i]);
            return s;
        };
        return {false, "numbers used {" + list(used) + "} do not match the given {" +
                           list(expected) + "} exactly once each"};
    }

    EvalOutcome out = evaluate(*expr);
    if (!out.ok) return {false, "evaluation failed: " + out.message};
    if (!(out.value == Rational{24, 1}))
        return {false, "expression evaluates to " + out.value.str() + ", not 24"};
    return {true, ""};
}

Verdict verify_sixfives(const Instance& inst, const std::string& answer) {
    std::string why;
    ExprPtr expr = extract_expression(answer, why);
    if (!expr) return {false, "unparseable expression: " + (why.empty() ? answer : why)};

    std::size_t fives = 0;
    for (const std::string& tok : literal_tokens(*expr)) {
        for (char c : tok)
            if (c != '5')
                return {false, "literal " + tok + " contains a digit other than 5"};
        fives += tok.size();
    }
    if (fives != 6)
        return {false, "uses the digit 5 " + std::to_string(fives) +
                           " times; exactly 6 are required"};

    int target = inst.input["target"].get<int>();
    EvalOutcome out = evaluate(*expr);
    if (!out.ok) return {false, "evaluation failed: " + out.message};
    if (!(out.value == Rational{target, 1}))
        return {false, "expression evaluates to " + out.value.str() + ", not " +
                           std::to_string(target)};
    return {true, ""};
}

Verdict verify_tol(const Instance& inst, const std::string& answer, bool relax) {
    tol::State init, goal;
    if (!tol::state_from_json(inst.input["init"], init) ||
        !tol::state_from_json(inst.input["goal"], goal))
        return {false, "instance is missing valid init/goal configurations"};

    std::vector<tol::Move> moves;
    std::string perr;
    if (!tol::parse_moves(answer, moves, perr)) return {false, perr};

    tol::State cur = init;
    for (std::size_t i = 0; i < moves.size(); ++i) {
        auto out = tol::apply_move(cur, moves[i]);
        if (!out.ok)
            return {false, "move " + std::to_string(i + 1) + " (peg " +
                               std::to_string(moves[i].from) + " to peg " +
                               std::to_string(moves[i].to) + ") is illegal: " + out.error};
        cur = out.state;
    }
    if (!(cur == goal)) return {false, "final configuration does not match the goal"};

    int optimal = inst.target.is_object() ? inst.target.value("optimal_length", -1) : -1;
    if (!relax && optimal >= 0 && static_cast<int>(moves.size()) != optimal)
        return {false, "uses " + std::to_string(moves.size()) +
                           " moves; the minimum is " + std::to_string(optimal)};
    return {true, ""};
}

} // namespace

Verdict verify(const Instance& inst, const std::string& answer, bool relax_tol_optimality) {
    switch (inst.kind) {
    case TaskKind::Game24: return verify_game24(inst, answer);
    case TaskKind::SixFives: return verify_sixfives(inst, answer);
    case TaskKind::TowerOfLondon: return verify_tol(inst, answer, relax_tol_optimality);
    }
    return {false, "unknown task"};
}

// ---------------------------------------------------------------------------
// Generation

std::vector<Instance> generate_instances(TaskKind kind, int count, std::uint64_t seed) {
    if (count < 1) throw std::invalid_argument("generate_instances: count must be >= 1");
    std::mt19937_64 master(seed);
    std::vector<Instance> out;
    out.reserve(static_cast<std::size_t>(count));

    for (int i = 0; i < count; ++i) {
        std::uint64_t inst_seed = master();
        std::mt19937_64 rng(inst_seed);
        Instance inst;
        inst.kind = kind;
        inst.seed = inst_seed;

        switch (kind) {
        case TaskKind::Game24: {
            const auto& band = game24::difficulty_band();
            bool found = false;
            for (int attempt = 0; attempt < 200000 && !found; ++attempt) {
                std::array<int, 4> nums;
                for (int& n : nums) n = static_cast<int>(uniform_below(rng, 13)) + 1;
                int c = game24::solution_count(nums);
                if (c <= 0 || c < band.lo || c > band.hi) continue;
                inst.input = Json{{"numbers", Json::array({nums[0], nums[1], nums[2], nums[3]})}};
                inst.target = 24;
                inst.oracle = Json{{"solvable", true}, {"difficulty", c}};
                found = true;
            }
            if (!found)
                throw std::runtime_error(
                    "seed-pool-exhausted: no 24-game tuple inside the difficulty band");
            break;
        }
        case TaskKind::SixFives: {
            const auto& targets = sixfives::solvable_targets();
            if (targets.empty())
                throw std::runtime_error("seed-pool-exhausted: no solvable six-fives targets");
            int t = targets[uniform_below(rng, targets.size())];
            inst.input = Json{{"target", t}};
            inst.target = t;
            inst.oracle = Json{{"solvable", true}};
            break;
        }
        case TaskKind::TowerOfLondon: {
            // Lengths cycle through 1..8 so every optimal length is
            // represented once per eight instances.
            int length = (i % 8) + 1;
            const auto& states = tol::enumerate_states();
            // Pairs at each distance come from the cached BFS tables.
            std::vector<std::pair<int, int>> bucket;
            for (int a = 0; a < static_cast<int>(states.size()); ++a)
                for (int b = 0; b < static_cast<int>(states.size()); ++b)
                    if (tol::distance(states[a], states[b]) == length) bucket.push_back({a, b});
            if (bucket.empty())
                throw std::runtime_error("seed-pool-exhausted: no state pair at distance " +
                                         std::to_string(length));
            auto [ia, ib] = bucket[uniform_below(rng, bucket.size())];
            inst.input = Json{{"init", tol::state_to_json(states[ia])},
                              {"goal", tol::state_to_json(states[ib])}};
            inst.target = Json{{"goal", tol::state_to_json(states[ib])},
                               {"optimal_length", length}};
            inst.oracle = Json{{"optimal_length", length}};
            break;
        }
        }
        inst.constraints = render_context(inst);
        out.push_back(std::move(inst));
    }
    return out;
}

std::optional<std::string> oracle_solve(const Instance& inst) {
    switch (inst.kind) {
    case TaskKind::Game24: {
        std::array<int, 4> nums{};
        for (int i = 0; i < 4; ++i) nums[i] = inst.input["numbers"][i].get<int>();
        return game24::solve(nums);
    }
    case TaskKind::SixFives:
        return sixfives::expression_for(inst.input["target"].get<int>());
    case TaskKind::TowerOfLondon: {
        tol::State init, goal;
        if (!tol::state_from_json(inst.input["init"], init) ||
            !tol::state_from_json(inst.input["goal"], goal))
            return std::nullopt;
        Json moves = Json::array();
        for (const auto& m : tol::shortest_path(init, goal))
            moves.push_back(Json::array({m.from, m.to}));
        return moves.dump();
    }
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Serialization

Json instance_to_json(const Instance& inst) {
    return Json{{"kind", task_name(inst.kind)}, {"input", inst.input},
                {"constraints", inst.constraints}, {"target", inst.target},
                {"seed", inst.seed}, {"oracle", inst.oracle}};
}

bool instance_from_json(const Json& doc, Instance& out, std::string& error) {
    if (!doc.is_object()) {
        error = "instance line is not a JSON object";
        return false;
    }
    if (!doc.contains("kind") || !doc["kind"].is_string() ||
        !parse_task_name(doc["kind"].get<std::string>(), out.kind)) {
        error = "missing or unknown task kind";
        return false;
    }
    if (!doc.contains("input")) {
        error = "missing 'input'";
        return false;
    }
    out.input = doc["input"];
    out.constraints = doc.value("constraints", std::string{});
    out.target = doc.contains("target") ? doc["target"] : Json(nullptr);
    out.seed = doc.value("seed", std::uint64_t{0});
    out.oracle = doc.contains("oracle") ? doc["oracle"] : Json::object();
    if (out.constraints.empty()) out.constraints = render_context(out);
    return true;
}

void save_instances(const std::string& path, const std::vector<Instance>& list) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
    for (const auto& inst : list) f << instance_to_json(inst).dump() << '\n';
}

std::vector<Instance> load_instances(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open instance file '" + path + "'");
    std::vector<Instance> out;
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (trim_copy(line).empty()) continue;
        Json doc = Json::parse(line, nullptr, false);
        Instance inst;
        std::string err;
        if (doc.is_discarded() || !instance_from_json(doc, inst, err))
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " +
                                     (err.empty() ? "invalid JSON" : err));
        out.push_back(std::move(inst));
    }
    return out;
}

} // namespace bigmas::tasks
