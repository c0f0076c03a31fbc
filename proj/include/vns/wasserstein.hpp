#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>
#include <vector>

#include "vns/errors.hpp"
#include "vns/field.hpp"
#include "vns/grid.hpp"

namespace vns {

/// Geodesic distance between two grid nodes on the flat torus.
inline double torus_node_distance(const TorusGrid& g, std::size_t ia, std::size_t ib) {
    auto ca = g.coords(ia);
    auto cb = g.coords(ib);
    double s = 0.0;
    for (int a = 0; a < g.dim(); ++a) {
        double d = std::abs(g.node(ca[a]) - g.node(cb[a]));
        d = std::min(d, kTwoPi - d);
        s += d * d;
    }
    return std::sqrt(s);
}

/// Geodesic diameter of the torus.
inline double torus_diameter(int dim) {
    return 0.5 * kTwoPi * std::sqrt(static_cast<double>(dim));
}

namespace detail {

struct AtomSet {
    std::vector<std::size_t> idx;
    std::vector<double> mass;
    double total = 0.0;
};

inline AtomSet atoms_of(const TorusField& f, double threshold) {
    AtomSet s;
    const std::size_t sz = f.grid().size();
    const double cv = f.grid().cell_volume();
    for (std::size_t i = 0; i < sz; ++i) {
        const double m = f.value(0, i) * cv;
        if (m > threshold) {
            s.idx.push_back(i);
            s.mass.push_back(m);
            s.total += m;
        }
    }
    return s;
}

inline void check_w1_inputs(const TorusField& mu, const TorusField& nu) {
    if (mu.grid() != nu.grid())
        throw std::invalid_argument("wasserstein1: grids differ");
    if (mu.components() != 1 || nu.components() != 1)
        throw std::invalid_argument("wasserstein1: scalar fields required");
    double lo = 0.0;
    for (double v : mu.values()) lo = std::min(lo, v);
    for (double v : nu.values()) lo = std::min(lo, v);
    if (lo < -1e-12) throw std::invalid_argument("wasserstein1: negative mass");
    const double ma = mu.mean(), mb = nu.mean();
    if (!(ma > 0.0) || !(mb > 0.0))
        throw std::invalid_argument("wasserstein1: zero total mass");
    if (std::abs(ma - mb) > 1e-8 * std::max(ma, mb))
        throw std::invalid_argument("wasserstein1: total masses differ");
}

} // namespace detail

/// Exact W1 via successive-shortest-path min-cost flow on the difference
/// measure. Mass shared between mu and nu stays in place (the ground cost is
/// a metric), so only the signed difference is transported.
inline double wasserstein1_exact(const TorusField& mu, const TorusField& nu) {
    detail::check_w1_inputs(mu, nu);
    const TorusGrid& g = mu.grid();
    const std::size_t sz = g.size();
    const double cv = g.cell_volume();

    std::vector<std::size_t> src_idx, snk_idx;
    std::vector<double> supply, demand;
    double total_supply = 0.0, total_demand = 0.0;
    for (std::size_t i = 0; i < sz; ++i) {
        const double d = (mu.value(0, i) - nu.value(0, i)) * cv;
        if (d > 0.0) {
            src_idx.push_back(i);
            supply.push_back(d);
            total_supply += d;
        } else if (d < 0.0) {
            snk_idx.push_back(i);
            demand.push_back(-d);
            total_demand += -d;
        }
    }
    if (src_idx.empty() || snk_idx.empty()) return 0.0;
    // Balance the tiny input mismatch allowed by the precondition.
    const double fix = total_supply / total_demand;
    for (double& d : demand) d *= fix;

    const std::size_t S = src_idx.size(), T = snk_idx.size(), V = S + T;
    std::vector<double> cost(S * T);
    for (std::size_t s = 0; s < S; ++s)
        for (std::size_t t = 0; t < T; ++t)
            cost[s * T + t] = torus_node_distance(g, src_idx[s], snk_idx[t]);

    std::vector<double> flow(S * T, 0.0);
    std::vector<double> pot(V, 0.0);
    std::vector<double> rem_supply = supply, rem_demand = demand;
    const double inf = std::numeric_limits<double>::infinity();
    const double mass_tol = 1e-15 * total_supply;

    double remaining = total_supply;
    const int max_rounds = static_cast<int>(30 * (S + T) + 100);
    int rounds = 0;
    double total_cost = 0.0;
    while (remaining > mass_tol) {
        if (++rounds > max_rounds)
            throw NumericalError("w1", "wasserstein1_exact: augmentation cap hit");
        bool any_source = false;
        for (std::size_t s = 0; s < S && !any_source; ++s)
            if (rem_supply[s] > mass_tol) any_source = true;
        if (!any_source) break;  // leftover is rounding mass from balancing
        // Dense Dijkstra on the residual bipartite graph with reduced costs.
        std::vector<double> dist(V, inf);
        std::vector<int> parent(V, -1);
        std::vector<bool> done(V, false);
        for (std::size_t s = 0; s < S; ++s)
            if (rem_supply[s] > mass_tol) dist[s] = 0.0;
        for (;;) {
            std::size_t v = V;
            double dv = inf;
            for (std::size_t u = 0; u < V; ++u)
                if (!done[u] && dist[u] < dv) {
                    dv = dist[u];
                    v = u;
                }
            if (v == V) break;
            done[v] = true;
            if (v < S) {
                for (std::size_t t = 0; t < T; ++t) {
                    if (done[S + t]) continue;
                    const double nd = dv + cost[v * T + t] + pot[v] - pot[S + t];
                    if (nd < dist[S + t] - 1e-18) {
                        dist[S + t] = nd;
                        parent[S + t] = static_cast<int>(v);
                    }
                }
            } else {
                const std::size_t t = v - S;
                for (std::size_t s = 0; s < S; ++s) {
                    if (done[s] || flow[s * T + t] <= mass_tol) continue;
                    const double nd = dv - cost[s * T + t] + pot[S + t] - pot[s];
                    if (nd < dist[s] - 1e-18) {
                        dist[s] = nd;
                        parent[s] = static_cast<int>(S + t);
                    }
                }
            }
        }
        // Nearest reachable sink with remaining demand.
        std::size_t best = V;
        double best_dist = inf;
        for (std::size_t t = 0; t < T; ++t)
            if (rem_demand[t] > mass_tol && dist[S + t] < best_dist) {
                best_dist = dist[S + t];
                best = S + t;
            }
        if (best == V)
            throw NumericalError("w1", "wasserstein1_exact: no augmenting path");
        for (std::size_t v = 0; v < V; ++v)
            pot[v] += std::min(dist[v], best_dist);
        // Bottleneck: the sink's remaining demand, the root source's
        // remaining supply, and the flow on every backward edge of the path.
        double push_amt = rem_demand[best - S];
        int root = static_cast<int>(best);
        for (int v = static_cast<int>(best); parent[v] >= 0; v = parent[v]) {
            const int p = parent[v];
            if (v < static_cast<int>(S))  // backward edge (sink p -> source v)
                push_amt = std::min(push_amt,
                                    flow[static_cast<std::size_t>(v) * T + (p - S)]);
            root = p;
        }
        push_amt = std::min(push_amt, rem_supply[root]);
        for (int v = static_cast<int>(best); parent[v] >= 0; v = parent[v]) {
            const int p = parent[v];
            if (v >= static_cast<int>(S))  // forward edge (source p -> sink v)
                flow[static_cast<std::size_t>(p) * T + (v - S)] += push_amt;
            else
                flow[static_cast<std::size_t>(v) * T + (p - S)] -= push_amt;
        }
        rem_supply[root] -= push_amt;
        rem_demand[best - S] -= push_amt;
        remaining -= push_amt;
        (void)total_cost;
    }
    double w = 0.0;
    for (std::size_t s = 0; s < S; ++s)
        for (std::size_t t = 0; t < T; ++t) w += flow[s * T + t] * cost[s * T + t];
    return w;
}

namespace detail {

/// Log-domain Sinkhorn between two atom sets; returns the sharp transport
/// cost <P, C> of the entropic plan at regularization `reg`.
inline double sinkhorn_sharp_cost(const TorusGrid& g, const AtomSet& A,
                                  const AtomSet& B, double reg) {
    const std::size_t n = A.idx.size(), m = B.idx.size();
    std::vector<double> loga(n), logb(m);
    for (std::size_t i = 0; i < n; ++i) loga[i] = std::log(A.mass[i] / A.total);
    for (std::size_t j = 0; j < m; ++j) logb[j] = std::log(B.mass[j] / B.total);

    std::vector<double> C(n * m);
    double cmax = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            C[i * m + j] = torus_node_distance(g, A.idx[i], B.idx[j]);
            cmax = std::max(cmax, C[i * m + j]);
        }

    std::vector<double> f(n, 0.0), gpot(m, 0.0);
    auto half_update_f = [&](double eps_reg) {
        for (std::size_t i = 0; i < n; ++i) {
            double best = -1e300;
            for (std::size_t j = 0; j < m; ++j)
                best = std::max(best, logb[j] + (gpot[j] - C[i * m + j]) / eps_reg);
            double acc = 0.0;
            for (std::size_t j = 0; j < m; ++j)
                acc += std::exp(logb[j] + (gpot[j] - C[i * m + j]) / eps_reg - best);
            f[i] = -eps_reg * (best + std::log(acc));
        }
    };
    auto half_update_g = [&](double eps_reg) {
        for (std::size_t j = 0; j < m; ++j) {
            double best = -1e300;
            for (std::size_t i = 0; i < n; ++i)
                best = std::max(best, loga[i] + (f[i] - C[i * m + j]) / eps_reg);
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                acc += std::exp(loga[i] + (f[i] - C[i * m + j]) / eps_reg - best);
            gpot[j] = -eps_reg * (best + std::log(acc));
        }
    };

    // Epsilon scaling from a quarter of the diameter down to the target.
    std::vector<double> levels;
    for (double e = std::max(reg, cmax / 4.0); e > reg * 1.5; e /= 2.0)
        levels.push_back(e);
    levels.push_back(reg);
    for (double e : levels) {
        const int iters = (e == reg) ? 20000 : 60;
        for (int it = 0; it < iters; ++it) {
            half_update_f(e);
            half_update_g(e);
            if (e == reg && it % 8 == 7) {
                // marginal violation of the row sums
                double viol = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    double best = -1e300;
                    for (std::size_t j = 0; j < m; ++j)
                        best = std::max(best,
                                        (f[i] + gpot[j] - C[i * m + j]) / e + logb[j]);
                    double acc = 0.0;
                    for (std::size_t j = 0; j < m; ++j)
                        acc += std::exp((f[i] + gpot[j] - C[i * m + j]) / e + logb[j] -
                                        best);
                    viol += std::abs(std::exp(best + std::log(acc)) - 1.0) *
                            std::exp(loga[i]);
                }
                if (viol < 1e-8) break;
            }
        }
    }

    // Sharp cost of the plan.
    double cost_acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            const double lp =
                (f[i] + gpot[j] - C[i * m + j]) / reg + loga[i] + logb[j];
            if (lp > -700.0) cost_acc += std::exp(lp) * C[i * m + j];
        }
    return cost_acc;
}

} // namespace detail

/// Entropic W1 with de-biasing: sharp plan cost minus the average of the two
/// self-transport costs, at regularization 1e-3 times the torus diameter.
inline double wasserstein1_entropic(const TorusField& mu, const TorusField& nu,
                                    double reg_factor = 1e-3) {
    detail::check_w1_inputs(mu, nu);
    const TorusGrid& g = mu.grid();
    const double reg = reg_factor * torus_diameter(g.dim());
    const double thr = 1e-14 * mu.mean();
    auto A = detail::atoms_of(mu, thr);
    auto B = detail::atoms_of(nu, thr);
    if (A.idx.empty() || B.idx.empty()) return 0.0;
    const double scale = 0.5 * (A.total + B.total);
    const double cab = detail::sinkhorn_sharp_cost(g, A, B, reg);
    const double caa = detail::sinkhorn_sharp_cost(g, A, A, reg);
    const double cbb = detail::sinkhorn_sharp_cost(g, B, B, reg);
    return std::max(0.0, (cab - 0.5 * (caa + cbb))) * scale;
}

/// W1 under the torus geodesic metric: exact network-flow solution for grids
/// up to 32 points per axis, entropic solver with de-biasing above.
inline double wasserstein1(const TorusField& mu, const TorusField& nu) {
    if (mu.grid().n() <= 32) return wasserstein1_exact(mu, nu);
    return wasserstein1_entropic(mu, nu);
}

/// Conservative box-average restriction of a density to a coarser grid
/// (n divisible by n_coarse); preserves the mean exactly.
inline TorusField coarsen_density(const TorusField& rho, int n_coarse) {
    const TorusGrid& g = rho.grid();
    if (g.n() % n_coarse != 0)
        throw std::invalid_argument("coarsen_density: n not divisible");
    if (g.n() == n_coarse) return rho;
    const int f = g.n() / n_coarse;
    TorusGrid gc(g.dim(), n_coarse);
    TorusField out(gc, 1);
    double* dst = out.mutable_component(0);
    const double* src = rho.component(0);
    const double inv = 1.0 / std::pow(static_cast<double>(f), g.dim());
    for (std::size_t i = 0; i < g.size(); ++i) {
        auto c = g.coords(i);
        std::array<int, 3> cc{c[0] / f, c[1] / f, g.dim() > 2 ? c[2] / f : 0};
        dst[gc.index(cc)] += src[i] * inv;
    }
    return out;
}

} // namespace vns
