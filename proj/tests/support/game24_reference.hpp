#pragma once

#include <array>
#include <numeric>
#include <vector>

namespace test_support {

// A second, structurally different 24-point decision procedure used to
// cross-check the production search: repeatedly replace a pair of exact
// fractions with one combined value until a single number remains.
struct Frac {
    long long n = 0;
    long long d = 1;
};

inline Frac frac_norm(long long n, long long d) {
    if (d < 0) {
        n = -n;
        d = -d;
    }
    long long g = std::gcd(n < 0 ? -n : n, d);
    if (g > 1) {
        n /= g;
        d /= g;
    }
    return {n, d};
}

inline bool pair_reduce_to_24(std::vector<Frac> xs) {
    if (xs.size() == 1) return xs[0].n == 24 * xs[0].d;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        for (std::size_t j = i + 1; j < xs.size(); ++j) {
            Frac a = xs[i], b = xs[j];
            std::vector<Frac> rest;
            for (std::size_t k = 0; k < xs.size(); ++k)
                if (k != i && k != j) rest.push_back(xs[k]);

            std::vector<Frac> combos = {
                frac_norm(a.n * b.d + b.n * a.d, a.d * b.d),
                frac_norm(a.n * b.d - b.n * a.d, a.d * b.d),
                frac_norm(b.n * a.d - a.n * b.d, a.d * b.d),
                frac_norm(a.n * b.n, a.d * b.d),
            };
            if (b.n != 0) combos.push_back(frac_norm(a.n * b.d, a.d * b.n));
            if (a.n != 0) combos.push_back(frac_norm(b.n * a.d, b.d * a.n));

            for (const Frac& c : combos) {
                rest.push_back(c);
                if (pair_reduce_to_24(rest)) return true;
                rest.pop_back();
            }
        }
    }
    return false;
}

inline bool pair_reduce_solvable(const std::array<int, 4>& nums) {
    std::vector<Frac> xs;
    for (int n : nums) xs.push_back({n, 1});
    return pair_reduce_to_24(std::move(xs));
}

} // namespace test_support
