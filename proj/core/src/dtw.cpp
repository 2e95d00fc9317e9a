#include "soundalike/dtw.hpp"

#include <algorithm>
#include <cmath>

#include "soundalike/errors.hpp"

namespace soundalike {

std::size_t SlopeConstraint::max_axis_run() const {
    double k = std::ceil(static_cast<double>(window) * max_slope / (max_slope + 1.0));
    return static_cast<std::size_t>(k);
}

double local_distance(std::span<const double> a, std::span<const double> b,
                      Metric metric) {
    if (a.size() != b.size()) throw DataError("local_distance: dimension mismatch");
    if (metric == Metric::euclidean) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            double diff = a[i] - b[i];
            s += diff * diff;
        }
        return std::sqrt(s);
    }
    double na = l2_norm(a), nb = l2_norm(b);
    if (na == 0.0 && nb == 0.0) return 0.0;
    if (na == 0.0 || nb == 0.0) return 1.0;
    double dist = 1.0 - dot(a, b) / (na * nb);
    return dist < 0.0 ? 0.0 : dist;
}

namespace {

void require_non_empty(const Mat& a, const Mat& b) {
    if (a.rows() == 0 || b.rows() == 0) throw DataError("dtw: empty sequence");
    if (a.cols() != b.cols()) throw DataError("dtw: dimension mismatch");
}

// Classic recurrence, two rolling rows over the shorter sequence.
double classic_distance(const Mat& a, const Mat& b, Metric metric) {
    const Mat& outer = a.rows() >= b.rows() ? a : b;
    const Mat& inner = a.rows() >= b.rows() ? b : a;
    const std::size_t m = outer.rows(), n = inner.rows();

    std::vector<double> prev(n), cur(n);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double d = local_distance(outer.row(i), inner.row(j), metric);
            if (i == 0 && j == 0) {
                cur[j] = d;
            } else if (i == 0) {
                cur[j] = cur[j - 1] + d;
            } else if (j == 0) {
                cur[j] = prev[j] + d;
            } else {
                cur[j] = std::min({prev[j - 1], cur[j - 1], prev[j]}) + d;
            }
        }
        std::swap(prev, cur);
    }
    return prev[n - 1];
}

AlignmentResult classic_with_path(const Mat& a, const Mat& b, Metric metric) {
    const std::size_t m = a.rows(), n = b.rows();
    Mat cost(m, n);
    std::vector<unsigned char> move(m * n); // 0 diag, 1 from (i,j-1), 2 from (i-1,j)
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double d = local_distance(a.row(i), b.row(j), metric);
            if (i == 0 && j == 0) {
                cost(i, j) = d;
            } else if (i == 0) {
                cost(i, j) = cost(i, j - 1) + d;
                move[i * n + j] = 1;
            } else if (j == 0) {
                cost(i, j) = cost(i - 1, j) + d;
                move[i * n + j] = 2;
            } else {
                double best = cost(i - 1, j - 1);
                unsigned char mv = 0;
                if (cost(i, j - 1) < best) { best = cost(i, j - 1); mv = 1; }
                if (cost(i - 1, j) < best) { best = cost(i - 1, j); mv = 2; }
                cost(i, j) = best + d;
                move[i * n + j] = mv;
            }
        }
    }
    AlignmentResult result;
    result.distance = cost(m - 1, n - 1);
    std::vector<std::pair<std::size_t, std::size_t>> path;
    std::size_t i = m - 1, j = n - 1;
    path.emplace_back(i, j);
    while (i != 0 || j != 0) {
        switch (move[i * n + j]) {
            case 0: --i; --j; break;
            case 1: --j; break;
            default: --i; break;
        }
        path.emplace_back(i, j);
    }
    std::reverse(path.begin(), path.end());
    result.path = std::move(path);
    return result;
}

// Trailing-run DP state for the slope constraint: 0 after a diagonal step
// (or at the start), 1..K a run of K insertions, K+1..2K a run of
// deletions. Infeasible states carry +inf.
struct WeightedDp {
    double w_sub, w_del, w_ins;
    std::size_t run_cap; // 0 disables the constraint (single state)
    std::size_t states;

    explicit WeightedDp(const StepWeights& w, const std::optional<SlopeConstraint>& slope)
        : w_sub(w.substitution), w_del(w.deletion), w_ins(w.insertion) {
        run_cap = slope ? slope->max_axis_run() : 0;
        states = run_cap == 0 ? 1 : 2 * run_cap + 1;
    }

    std::size_t ins_state(std::size_t run) const { return run; }
    std::size_t del_state(std::size_t run) const { return run_cap + run; }
};

bool ratio_feasible(std::size_t m, std::size_t n, const SlopeConstraint& slope) {
    auto lo = static_cast<double>(std::min(m, n));
    auto hi = static_cast<double>(std::max(m, n));
    return hi <= slope.max_slope * lo;
}

double weighted_distance(const Mat& a, const Mat& b, const WeightedDp& dp, Metric metric) {
    const std::size_t m = a.rows(), n = b.rows();
    const std::size_t S = dp.states;
    const double inf = kInfeasible;

    if (S == 1) { // unconstrained: plain weighted recurrence
        std::vector<double> prev(n), cur(n);
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                double d = local_distance(a.row(i), b.row(j), metric);
                if (i == 0 && j == 0) {
                    cur[j] = d;
                } else {
                    double best = inf;
                    if (i > 0 && j > 0) best = prev[j - 1] + dp.w_sub * d;
                    if (j > 0) best = std::min(best, cur[j - 1] + dp.w_del * d);
                    if (i > 0) best = std::min(best, prev[j] + dp.w_ins * d);
                    cur[j] = best;
                }
            }
            std::swap(prev, cur);
        }
        return prev[n - 1];
    }

    const std::size_t cap = dp.run_cap;
    std::vector<double> prev(n * S, inf), cur(n * S, inf);
    for (std::size_t i = 0; i < m; ++i) {
        std::fill(cur.begin(), cur.end(), inf);
        for (std::size_t j = 0; j < n; ++j) {
            double d = local_distance(a.row(i), b.row(j), metric);
            double* out = cur.data() + j * S;
            if (i == 0 && j == 0) {
                out[0] = d;
                continue;
            }
            if (i > 0 && j > 0) { // diagonal into state 0
                const double* src = prev.data() + (j - 1) * S;
                double best = inf;
                for (std::size_t s = 0; s < S; ++s) best = std::min(best, src[s]);
                if (best < inf) out[0] = best + dp.w_sub * d;
            }
            if (j > 0) { // deletion step extends or starts a deletion run
                const double* src = cur.data() + (j - 1) * S;
                double fresh = src[0];
                for (std::size_t r = 1; r <= cap; ++r)
                    fresh = std::min(fresh, src[dp.ins_state(r)]);
                if (fresh < inf) out[dp.del_state(1)] = fresh + dp.w_del * d;
                for (std::size_t r = 1; r < cap; ++r) {
                    double c = src[dp.del_state(r)];
                    if (c < inf)
                        out[dp.del_state(r + 1)] =
                            std::min(out[dp.del_state(r + 1)], c + dp.w_del * d);
                }
            }
            if (i > 0) { // insertion step
                const double* src = prev.data() + j * S;
                double fresh = src[0];
                for (std::size_t r = 1; r <= cap; ++r)
                    fresh = std::min(fresh, src[dp.del_state(r)]);
                if (fresh < inf) out[dp.ins_state(1)] = fresh + dp.w_ins * d;
                for (std::size_t r = 1; r < cap; ++r) {
                    double c = src[dp.ins_state(r)];
                    if (c < inf)
                        out[dp.ins_state(r + 1)] =
                            std::min(out[dp.ins_state(r + 1)], c + dp.w_ins * d);
                }
            }
        }
        std::swap(prev, cur);
    }
    double best = inf;
    for (std::size_t s = 0; s < S; ++s) best = std::min(best, prev[(n - 1) * S + s]);
    return best;
}

AlignmentResult weighted_with_path(const Mat& a, const Mat& b, const WeightedDp& dp,
                                   Metric metric) {
    const std::size_t m = a.rows(), n = b.rows();
    const std::size_t S = dp.states;
    const std::size_t cap = dp.run_cap;
    const double inf = kInfeasible;

    std::vector<double> cost(m * n * S, inf);
    // packed backpointer: move (0 diag, 1 del, 2 ins) and previous state
    std::vector<std::uint16_t> back(m * n * S, 0xFFFF);
    auto at = [&](std::size_t i, std::size_t j, std::size_t s) { return (i * n + j) * S + s; };

    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double d = local_distance(a.row(i), b.row(j), metric);
            if (i == 0 && j == 0) {
                cost[at(0, 0, 0)] = d;
                continue;
            }
            if (i > 0 && j > 0) {
                double best = inf;
                std::size_t best_s = 0;
                for (std::size_t s = 0; s < S; ++s) {
                    double c = cost[at(i - 1, j - 1, s)];
                    if (c < best) { best = c; best_s = s; }
                }
                if (best < inf) {
                    cost[at(i, j, 0)] = best + dp.w_sub * d;
                    back[at(i, j, 0)] = static_cast<std::uint16_t>(best_s << 2);
                }
            }
            if (j > 0) {
                double fresh = cost[at(i, j - 1, 0)];
                std::size_t fresh_s = 0;
                std::size_t hi = S == 1 ? 0 : cap;
                for (std::size_t r = 1; r <= hi; ++r) {
                    double c = cost[at(i, j - 1, dp.ins_state(r))];
                    if (c < fresh) { fresh = c; fresh_s = dp.ins_state(r); }
                }
                std::size_t s_new = S == 1 ? 0 : dp.del_state(1);
                if (fresh < inf && fresh + dp.w_del * d < cost[at(i, j, s_new)]) {
                    cost[at(i, j, s_new)] = fresh + dp.w_del * d;
                    back[at(i, j, s_new)] = static_cast<std::uint16_t>(fresh_s << 2 | 1);
                }
                if (S > 1) {
                    for (std::size_t r = 1; r < cap; ++r) {
                        double c = cost[at(i, j - 1, dp.del_state(r))];
                        if (c < inf && c + dp.w_del * d < cost[at(i, j, dp.del_state(r + 1))]) {
                            cost[at(i, j, dp.del_state(r + 1))] = c + dp.w_del * d;
                            back[at(i, j, dp.del_state(r + 1))] =
                                static_cast<std::uint16_t>(dp.del_state(r) << 2 | 1);
                        }
                    }
                }
            }
            if (i > 0) {
                double fresh = cost[at(i - 1, j, 0)];
                std::size_t fresh_s = 0;
                std::size_t hi = S == 1 ? 0 : cap;
                for (std::size_t r = 1; r <= hi; ++r) {
                    double c = cost[at(i - 1, j, dp.del_state(r))];
                    if (c < fresh) { fresh = c; fresh_s = dp.del_state(r); }
                }
                std::size_t s_new = S == 1 ? 0 : dp.ins_state(1);
                if (fresh < inf && fresh + dp.w_ins * d < cost[at(i, j, s_new)]) {
                    cost[at(i, j, s_new)] = fresh + dp.w_ins * d;
                    back[at(i, j, s_new)] = static_cast<std::uint16_t>(fresh_s << 2 | 2);
                }
                if (S > 1) {
                    for (std::size_t r = 1; r < cap; ++r) {
                        double c = cost[at(i - 1, j, dp.ins_state(r))];
                        if (c < inf && c + dp.w_ins * d < cost[at(i, j, dp.ins_state(r + 1))]) {
                            cost[at(i, j, dp.ins_state(r + 1))] = c + dp.w_ins * d;
                            back[at(i, j, dp.ins_state(r + 1))] =
                                static_cast<std::uint16_t>(dp.ins_state(r) << 2 | 2);
                        }
                    }
                }
            }
        }
    }

    AlignmentResult result;
    double best = inf;
    std::size_t best_s = 0;
    for (std::size_t s = 0; s < S; ++s) {
        double c = cost[at(m - 1, n - 1, s)];
        if (c < best) { best = c; best_s = s; }
    }
    result.distance = best;
    if (!(best < inf)) return result; // no path for the sentinel

    std::vector<std::pair<std::size_t, std::size_t>> path;
    std::size_t i = m - 1, j = n - 1, s = best_s;
    path.emplace_back(i, j);
    while (i != 0 || j != 0) {
        std::uint16_t bp = back[at(i, j, s)];
        std::size_t prev_s = bp >> 2;
        switch (bp & 3) {
            case 0: --i; --j; break;
            case 1: --j; break;
            default: --i; break;
        }
        s = prev_s;
        path.emplace_back(i, j);
    }
    std::reverse(path.begin(), path.end());
    result.path = std::move(path);
    return result;
}

} // namespace

AlignmentResult dtw(const Mat& a, const Mat& b, Metric metric, bool want_path) {
    require_non_empty(a, b);
    if (want_path) return classic_with_path(a, b, metric);
    AlignmentResult result;
    result.distance = classic_distance(a, b, metric);
    return result;
}

AlignmentResult weighted_dtw(const Mat& a, const Mat& b, const StepWeights& weights,
                             const std::optional<SlopeConstraint>& slope, Metric metric,
                             bool want_path) {
    require_non_empty(a, b);
    if (slope && !ratio_feasible(a.rows(), b.rows(), *slope)) {
        AlignmentResult result;
        result.distance = kInfeasible;
        return result;
    }
    WeightedDp dp(weights, slope);
    if (want_path) return weighted_with_path(a, b, dp, metric);
    AlignmentResult result;
    if (b.rows() > a.rows()) {
        // mirror so the rolling rows span the shorter sequence; swapping the
        // sequences swaps insertion and deletion roles
        WeightedDp mirrored = dp;
        std::swap(mirrored.w_del, mirrored.w_ins);
        result.distance = weighted_distance(b, a, mirrored, metric);
    } else {
        result.distance = weighted_distance(a, b, dp, metric);
    }
    return result;
}

double normalize_distance(const AlignmentResult& result, std::size_t m, std::size_t n) {
    if (!std::isfinite(result.distance)) return result.distance;
    return result.distance / static_cast<double>(m + n);
}

} // namespace soundalike
