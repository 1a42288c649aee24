#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "cxg/error.hpp"
#include "cxg/grammar.hpp"
#include "cxg/parallel.hpp"

namespace cxg {

// One point of a growth curve: cumulative exposure (words) and the inventory
// size observed at that exposure.
struct GrowthPoint {
    std::uint64_t words = 0;
    std::uint64_t count = 0;
};

// Power-law growth fit v = k * w^alpha by least squares in log-log space,
// with a Student-t confidence interval on alpha.
struct HeapsFit {
    double alpha = 0.0;
    double log_k = 0.0;  // natural log of k
    double alpha_se = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double rss = 0.0;
    std::size_t n = 0;
};

inline HeapsFit heaps_fit(std::span<const GrowthPoint> points, double ci_level = 0.95) {
    if (points.size() < 3)
        throw InsufficientDataError("growth fit needs at least 3 points, got " +
                                    std::to_string(points.size()));
    if (!(ci_level > 0.0) || !(ci_level < 1.0))
        throw std::invalid_argument("ci_level must be in (0, 1)");
    const std::size_t n = points.size();
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (points[i].words == 0 || points[i].count == 0)
            throw std::invalid_argument("growth points must be positive for a log-log fit");
        x[i] = std::log(static_cast<double>(points[i].words));
        y[i] = std::log(static_cast<double>(points[i].count));
    }
    double xbar = 0.0, ybar = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        xbar += x[i];
        ybar += y[i];
    }
    xbar /= static_cast<double>(n);
    ybar /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - xbar) * (x[i] - xbar);
        sxy += (x[i] - xbar) * (y[i] - ybar);
    }
    if (sxx <= 0.0) throw std::invalid_argument("growth points need distinct word counts");

    HeapsFit fit;
    fit.n = n;
    fit.alpha = sxy / sxx;
    fit.log_k = ybar - fit.alpha * xbar;
    for (std::size_t i = 0; i < n; ++i) {
        double resid = y[i] - (fit.log_k + fit.alpha * x[i]);
        fit.rss += resid * resid;
    }
    if (fit.rss < 0.0) fit.rss = 0.0;
    fit.alpha_se = std::sqrt(fit.rss / static_cast<double>(n - 2) / sxx);
    boost::math::students_t dist(static_cast<double>(n - 2));
    double tq = boost::math::quantile(dist, 0.5 + ci_level / 2.0);
    fit.ci_low = fit.alpha - tq * fit.alpha_se;
    fit.ci_high = fit.alpha + tq * fit.alpha_se;
    return fit;
}

// Closed intervals: touching endpoints count as overlap.
inline bool ci_disjoint(const HeapsFit& a, const HeapsFit& b) {
    return a.ci_high < b.ci_low || b.ci_high < a.ci_low;
}

// First-increment inventory as a percentage of the final inventory.
inline double initial_burst(std::span<const GrowthPoint> points) {
    if (points.size() < 2)
        throw InsufficientDataError("initial burst needs at least 2 growth points");
    if (points.back().count == 0)
        throw std::invalid_argument("final inventory must be positive");
    return 100.0 * static_cast<double>(points.front().count) /
           static_cast<double>(points.back().count);
}

struct PearsonResult {
    double r = 0.0;
    double p_value = 1.0;  // two-sided, t test with n-2 degrees of freedom
    std::size_t n = 0;
};

inline PearsonResult pearson_r(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("series lengths differ");
    if (x.size() < 3)
        throw InsufficientDataError("correlation needs at least 3 points, got " +
                                    std::to_string(x.size()));
    const std::size_t n = x.size();
    double xbar = 0.0, ybar = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        xbar += x[i];
        ybar += y[i];
    }
    xbar /= static_cast<double>(n);
    ybar /= static_cast<double>(n);
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - xbar) * (x[i] - xbar);
        syy += (y[i] - ybar) * (y[i] - ybar);
        sxy += (x[i] - xbar) * (y[i] - ybar);
    }
    if (sxx <= 0.0 || syy <= 0.0)
        throw std::invalid_argument("correlation undefined for a constant series");

    PearsonResult out;
    out.n = n;
    out.r = sxy / std::sqrt(sxx * syy);
    if (out.r > 1.0) out.r = 1.0;
    if (out.r < -1.0) out.r = -1.0;
    double denom = 1.0 - out.r * out.r;
    if (denom <= 0.0) {
        out.p_value = 0.0;
        return out;
    }
    double t = out.r * std::sqrt(static_cast<double>(n - 2) / denom);
    boost::math::students_t dist(static_cast<double>(n - 2));
    out.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t)));
    return out;
}

// Mean with a Student-t confidence interval over a small family of values.
struct FamilyInterval {
    double mean = 0.0;
    double sd = 0.0;  // sample standard deviation (n-1)
    double low = 0.0;
    double high = 0.0;
    std::size_t n = 0;
};

inline FamilyInterval family_interval(std::span<const double> values, double level = 0.90) {
    if (values.size() < 2)
        throw InsufficientDataError("interval needs at least 2 values, got " +
                                    std::to_string(values.size()));
    if (!(level > 0.0) || !(level < 1.0))
        throw std::invalid_argument("level must be in (0, 1)");
    FamilyInterval out;
    out.n = values.size();
    for (double v : values) out.mean += v;
    out.mean /= static_cast<double>(out.n);
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.sd = std::sqrt(ss / static_cast<double>(out.n - 1));
    boost::math::students_t dist(static_cast<double>(out.n - 1));
    double half = boost::math::quantile(dist, 0.5 + level / 2.0) * out.sd /
                  std::sqrt(static_cast<double>(out.n));
    out.low = out.mean - half;
    out.high = out.mean + half;
    return out;
}

// Longest common subsequence of slot constraints over the longer length.
// 1.0 iff the constructions are identical; symmetric.
inline double fuzzy_similarity(const Construction& a, const Construction& b) {
    const std::size_t la = a.size(), lb = b.size();
    if (la == 0 && lb == 0) return 1.0;
    if (la == 0 || lb == 0) return 0.0;
    std::vector<std::size_t> prev(lb + 1, 0), cur(lb + 1, 0);
    for (std::size_t i = 1; i <= la; ++i) {
        for (std::size_t j = 1; j <= lb; ++j) {
            if (a.slots[i - 1] == b.slots[j - 1])
                cur[j] = prev[j - 1] + 1;
            else
                cur[j] = std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return static_cast<double>(prev[lb]) / static_cast<double>(std::max(la, lb));
}

struct SimilarityScore {
    double value = 0.0;
    std::uint64_t matched = 0;   // constructions paired (fuzzy) or shared (weighted)
    bool degenerate = false;     // both grammars empty / zero-weight union
};

// Jaccard overlap with fuzzy matching: candidate pairs at or above the
// threshold are greedily matched one-to-one, best similarity first (ties in
// canonical construction order), and the match count m scores as
// m / (|A| + |B| - m). With the default threshold, ~5/6 slots must agree.
inline SimilarityScore fuzzy_jaccard(const Constructicon& a, const Constructicon& b,
                                     double threshold = 0.71, int jobs = 1) {
    SimilarityScore out;
    const std::size_t na = a.size(), nb = b.size();
    if (na == 0 && nb == 0) {
        out.value = 1.0;
        out.degenerate = true;
        return out;
    }
    std::vector<const Construction*> av, bv;
    av.reserve(na);
    bv.reserve(nb);
    for (const auto& c : a.constructions) av.push_back(&c);
    for (const auto& c : b.constructions) bv.push_back(&c);

    struct Pair {
        double sim;
        std::uint32_t i, j;
    };
    std::vector<std::vector<Pair>> blocks(static_cast<std::size_t>(jobs < 1 ? 1 : jobs));
    parallel_blocks(na, jobs, [&](std::size_t blk, std::size_t begin, std::size_t end) {
        auto& local = blocks[blk];
        for (std::size_t i = begin; i < end; ++i) {
            for (std::size_t j = 0; j < nb; ++j) {
                std::size_t la = av[i]->size(), lb = bv[j]->size();
                // LCS is at most min(la, lb); skip pairs that cannot reach the bar.
                double bound = static_cast<double>(std::min(la, lb)) /
                               static_cast<double>(std::max<std::size_t>(1, std::max(la, lb)));
                if (bound < threshold) continue;
                double sim = fuzzy_similarity(*av[i], *bv[j]);
                if (sim >= threshold)
                    local.push_back({sim, static_cast<std::uint32_t>(i),
                                     static_cast<std::uint32_t>(j)});
            }
        }
    });
    std::vector<Pair> pairs;
    for (auto& blk : blocks) pairs.insert(pairs.end(), blk.begin(), blk.end());

    // Symmetric order: similarity descending, then the unordered construction
    // pair in canonical order.
    std::sort(pairs.begin(), pairs.end(), [&](const Pair& p, const Pair& q) {
        if (p.sim != q.sim) return p.sim > q.sim;
        const Construction *pmin = av[p.i], *pmax = bv[p.j];
        if (*pmax < *pmin) std::swap(pmin, pmax);
        const Construction *qmin = av[q.i], *qmax = bv[q.j];
        if (*qmax < *qmin) std::swap(qmin, qmax);
        if (*pmin != *qmin) return *pmin < *qmin;
        return *pmax < *qmax;
    });

    std::vector<char> used_a(na, 0), used_b(nb, 0);
    std::uint64_t m = 0;
    for (const Pair& p : pairs) {
        if (used_a[p.i] || used_b[p.j]) continue;
        used_a[p.i] = used_b[p.j] = 1;
        ++m;
    }
    out.matched = m;
    out.value = static_cast<double>(m) / static_cast<double>(na + nb - m);
    return out;
}

// Frequency-weighted Jaccard: shared mass over union mass, weighted by each
// construction's match count in a background corpus.
inline SimilarityScore weighted_jaccard(const Constructicon& a, const Constructicon& b,
                                        const std::map<Construction, std::uint64_t>& background) {
    SimilarityScore out;
    auto weight = [&](const Construction& c) -> std::uint64_t {
        auto it = background.find(c);
        return it == background.end() ? 0 : it->second;
    };
    std::uint64_t num = 0, den = 0;
    for (const auto& c : a.constructions) {
        std::uint64_t f = weight(c);
        den += f;
        if (b.contains(c)) {
            num += f;
            ++out.matched;
        }
    }
    for (const auto& c : b.constructions)
        if (!a.contains(c)) den += weight(c);
    if (den == 0) {
        out.degenerate = true;
        out.value = 0.0;
        return out;
    }
    out.value = static_cast<double>(num) / static_cast<double>(den);
    return out;
}

inline SimilarityScore weighted_jaccard(const Constructicon& a, const Constructicon& b,
                                        std::span<const AnnotatedSentence> background,
                                        int jobs = 1) {
    Constructicon all;
    all.constructions.insert(a.constructions.begin(), a.constructions.end());
    all.constructions.insert(b.constructions.begin(), b.constructions.end());
    return weighted_jaccard(a, b, count_tokens(all, background, jobs));
}

}  // namespace cxg
