#include "mklab/ot.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <queue>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "mklab/errors.hpp"

namespace mklab {

double TransportPlan::distance() const {
    return p == 1.0 ? cost : std::pow(cost, 1.0 / p);
}

namespace {

double ground_cost(const Vec2& a, const Vec2& b, double p) {
    const double d = dist(a, b);
    return p == 1.0 ? d : std::pow(d, p);
}

// Bucket grid for nearest-neighbour candidate arcs.
class PointGrid {
public:
    PointGrid(const std::vector<Atom>& pts, double cell) : pts_(pts), cell_(cell) {
        for (std::size_t k = 0; k < pts.size(); ++k)
            buckets_[key(pts[k].p)].push_back(static_cast<int>(k));
    }

    // indices of (at least) the k nearest points, by expanding rings
    void nearest(const Vec2& q, int k, std::vector<int>& out) const {
        out.clear();
        const long long cx = cell_index(q.x), cy = cell_index(q.y);
        for (int ring = 0;; ++ring) {
            const std::size_t before = out.size();
            for (long long dy = -ring; dy <= ring; ++dy)
                for (long long dx = -ring; dx <= ring; ++dx) {
                    if (std::max(std::llabs(dx), std::llabs(dy)) != ring) continue;
                    auto it = buckets_.find((cx + dx) * 2654435761LL + (cy + dy));
                    if (it == buckets_.end()) continue;
                    out.insert(out.end(), it->second.begin(), it->second.end());
                }
            if (static_cast<int>(out.size()) >= k && out.size() > before) {
                // one safety ring so the true k nearest cannot hide outside
                for (long long dy = -(ring + 1); dy <= ring + 1; ++dy)
                    for (long long dx = -(ring + 1); dx <= ring + 1; ++dx) {
                        if (std::max(std::llabs(dx), std::llabs(dy)) != ring + 1) continue;
                        auto it = buckets_.find((cx + dx) * 2654435761LL + (cy + dy));
                        if (it == buckets_.end()) continue;
                        out.insert(out.end(), it->second.begin(), it->second.end());
                    }
                break;
            }
            if (ring > 4096) break; // degenerate spread; use what we have
        }
        std::sort(out.begin(), out.end(), [&](int a, int b) {
            const double da = (pts_[a].p - q).norm2(), db = (pts_[b].p - q).norm2();
            return da != db ? da < db : a < b;
        });
        if (static_cast<int>(out.size()) > k) out.resize(k);
    }

private:
    long long cell_index(double t) const { return static_cast<long long>(std::floor(t / cell_)); }
    long long key(const Vec2& p) const {
        return cell_index(p.x) * 2654435761LL + cell_index(p.y);
    }
    const std::vector<Atom>& pts_;
    double cell_;
    std::unordered_map<long long, std::vector<int>> buckets_;
};

// Transportation network simplex over a growable arc pool. Nodes are the
// sources, the sinks, and one artificial root; the initial basis is the star
// of big-M artificial arcs, so the tree starts with depth one and all real
// arcs enter through pivots. Tree surgery is O(1) via sibling links, and the
// potentials of a re-hung subtree shift by a constant.
class TransportSimplex {
public:
    TransportSimplex(const std::vector<Atom>& src, const std::vector<Atom>& snk, double p)
        : src_(src), snk_(snk), p_(p), n_(static_cast<int>(src.size())),
          m_(static_cast<int>(snk.size())), N_(n_ + m_ + 1), root_(n_ + m_) {
        parent_.assign(N_, -1);
        parent_arc_.assign(N_, -1);
        depth_.assign(N_, 0);
        y_.assign(N_, 0.0);
        first_child_.assign(N_, -1);
        next_sib_.assign(N_, -1);
        prev_sib_.assign(N_, -1);

        // lexicographic supply perturbation, removed again by the exact
        // flow recomputation on the final basis
        double total = 0.0;
        for (const auto& a : src) total += a.w;
        const double delta = total * 1e-14 / (n_ + 1.0);
        supply_.assign(N_, 0.0);
        double excess = 0.0;
        for (int i = 0; i < n_; ++i) {
            const double d = delta * (i + 1);
            supply_[i] = src[i].w + d;
            excess += d;
        }
        double tsnk = 0.0;
        for (int j = 0; j < m_; ++j) tsnk += snk[j].w;
        for (int j = 0; j < m_; ++j) supply_[n_ + j] = -snk[j].w;
        supply_[n_ + m_ - 1] -= excess + (total - tsnk);
    }

    int add_arc(int i, int j) {
        const std::uint64_t id =
            (static_cast<std::uint64_t>(i) << 32) | static_cast<std::uint32_t>(j);
        if (!arc_ids_.insert(id).second) return -1;
        tail_.push_back(i);
        head_.push_back(n_ + j);
        const double c = ground_cost(src_[i].p, snk_[j].p, p_);
        acost_.push_back(c);
        aflow_.push_back(0.0);
        in_tree_.push_back(0);
        cmax_ = std::max(cmax_, c);
        return static_cast<int>(tail_.size()) - 1;
    }

    // star basis on the artificial root; call after the candidate arcs are in
    // so the big-M exceeds every real cost
    void build_initial_basis() {
        const double bigM = 16.0 * (cmax_ + 1.0);
        real_end_ = tail_.size();
        y_[root_] = 0.0;
        parent_[root_] = -1;
        parent_arc_[root_] = -1;
        depth_[root_] = 0;
        for (int v = 0; v < n_ + m_; ++v) {
            const bool is_src = v < n_;
            tail_.push_back(is_src ? v : root_);
            head_.push_back(is_src ? root_ : v);
            acost_.push_back(bigM);
            aflow_.push_back(is_src ? supply_[v] : -supply_[v]);
            in_tree_.push_back(1);
            parent_[v] = root_;
            parent_arc_[v] = static_cast<int>(tail_.size()) - 1;
            depth_[v] = 1;
            y_[v] = is_src ? bigM : -bigM;
            attach(v, root_);
        }
    }

    void optimize() {
        long long degenerate_run = 0;
        bool bland = false;
        const std::size_t A = real_end_;
        if (A == 0) return;
        const std::size_t block =
            std::max<std::size_t>(64, static_cast<std::size_t>(std::sqrt(static_cast<double>(A))));
        for (;;) {
            const double tol = enter_tolerance();
            int e = -1;
            if (!bland) {
                double best = -tol;
                std::size_t seen = 0, in_block = 0;
                std::size_t s = scan_pos_;
                for (; seen < A; ++seen, ++s) {
                    if (s >= A) s = 0;
                    if (!in_tree_[s]) {
                        const double rc = acost_[s] - y_[tail_[s]] + y_[head_[s]];
                        if (rc < best) {
                            best = rc;
                            e = static_cast<int>(s);
                        }
                    }
                    if (++in_block == block) {
                        if (e >= 0) break;
                        in_block = 0;
                    }
                }
                scan_pos_ = (s + 1 < A) ? s + 1 : 0;
            } else {
                for (std::size_t s = 0; s < A; ++s) {
                    if (in_tree_[s]) continue;
                    if (acost_[s] - y_[tail_[s]] + y_[head_[s]] < -tol) {
                        e = static_cast<int>(s);
                        break;
                    }
                }
            }
            if (e < 0) break;
            ++pivots_;
            const double theta = pivot(e);
            degenerate_run = theta > 0.0 ? 0 : degenerate_run + 1;
            if (degenerate_run > 4LL * N_) bland = true; // anti-cycling fallback
        }
    }

    // scans every source-sink pair against the current potentials and
    // appends the most violating arcs, a handful per source; returns the
    // number of arcs appended
    std::size_t add_violated_arcs() {
        const double tol = 10.0 * enter_tolerance();
        constexpr int kPerSource = 8;
        std::vector<std::pair<int, int>> found;
        std::vector<double> py(m_), px(m_), pyy(m_);
        for (int j = 0; j < m_; ++j) {
            py[j] = y_[n_ + j];
            px[j] = snk_[j].p.x;
            pyy[j] = snk_[j].p.y;
        }
        std::pair<double, int> top[kPerSource]; // (rc, j), rc ascending
        for (int i = 0; i < n_; ++i) {
            const double yi = y_[i];
            const double xi = src_[i].p.x, yi2 = src_[i].p.y;
            int count = 0;
            double cutoff = -tol; // rc must be below this to enter the top list
            for (int j = 0; j < m_; ++j) {
                const double thr = yi - py[j];
                if (thr <= tol) continue;
                const double dx = xi - px[j], dy = yi2 - pyy[j];
                const double d2 = dx * dx + dy * dy;
                if (d2 >= thr * thr) continue;
                const double rc = std::sqrt(d2) - thr;
                if (rc >= cutoff && count == kPerSource) continue;
                int pos = std::min(count, kPerSource - 1);
                while (pos > 0 && top[pos - 1].first > rc) {
                    top[pos] = top[pos - 1];
                    --pos;
                }
                top[pos] = {rc, j};
                if (count < kPerSource) ++count;
                if (count == kPerSource) cutoff = top[kPerSource - 1].first;
            }
            for (int k = 0; k < count; ++k) found.push_back({i, top[k].second});
        }
        std::size_t added = 0;
        for (auto [i, j] : found) {
            // appending must keep the artificial arcs at the tail of the
            // pool: move them over
            const int a = insert_real_arc(i, j);
            if (a >= 0) ++added;
        }
        return added;
    }

    std::size_t arc_count() const { return real_end_; }
    long long pivot_count() const { return pivots_; }

    // exact flows on the final basis with unperturbed weights
    void finalize(TransportPlan& plan) {
        std::vector<double> res(N_, 0.0);
        for (int i = 0; i < n_; ++i) res[i] = src_[i].w;
        for (int j = 0; j < m_; ++j) res[n_ + j] = -snk_[j].w;
        std::vector<int> order(N_);
        for (int v = 0; v < N_; ++v) order[v] = v;
        std::sort(order.begin(), order.end(),
                  [&](int a, int b) { return depth_[a] > depth_[b]; });
        double total = 0.0;
        for (const auto& a : src_) total += a.w;
        const double slack = 1e-9 * std::max(total, 1.0);
        for (int v : order) {
            if (v == root_) continue;
            const int a = parent_arc_[v];
            double f;
            if (tail_[a] == v) {
                f = res[v];
                res[head_[a]] += f;
            } else {
                f = -res[v];
                res[tail_[a]] -= f;
            }
            res[v] = 0.0;
            if (f < -slack)
                throw ConsistencyError("solve_transport: basis became infeasible");
            aflow_[a] = std::max(f, 0.0);
        }
        std::vector<PlanEntry> entries;
        for (std::size_t a = 0; a < tail_.size(); ++a) {
            if (!in_tree_[a] || !(aflow_[a] > 0.0)) continue;
            if (tail_[a] == root_ || head_[a] == root_) {
                if (aflow_[a] > slack)
                    throw ConsistencyError("solve_transport: artificial flow at optimum");
                continue;
            }
            entries.push_back({tail_[a], head_[a] - n_, aflow_[a]});
        }
        std::sort(entries.begin(), entries.end(), [](const PlanEntry& a, const PlanEntry& b) {
            return a.i != b.i ? a.i < b.i : a.j < b.j;
        });
        KahanSum cost;
        for (const auto& e : entries)
            cost.add(e.mass * ground_cost(src_[e.i].p, snk_[e.j].p, p_));
        plan.entries = std::move(entries);
        plan.cost = cost.value();
        plan.p = p_;
    }

private:
    double enter_tolerance() const { return 1e-13 * std::max(cmax_, 1e-300); }

    void attach(int child, int parent) {
        next_sib_[child] = first_child_[parent];
        prev_sib_[child] = -1;
        if (first_child_[parent] >= 0) prev_sib_[first_child_[parent]] = child;
        first_child_[parent] = child;
    }

    void detach(int child, int parent) {
        const int prev = prev_sib_[child], next = next_sib_[child];
        if (prev >= 0) next_sib_[prev] = next;
        else first_child_[parent] = next;
        if (next >= 0) prev_sib_[next] = prev;
        next_sib_[child] = prev_sib_[child] = -1;
    }

    // appends a real arc while keeping artificial arcs contiguous at the end
    int insert_real_arc(int i, int j) {
        const std::uint64_t id =
            (static_cast<std::uint64_t>(i) << 32) | static_cast<std::uint32_t>(j);
        if (!arc_ids_.insert(id).second) return -1;
        const std::size_t pos = real_end_;
        const double c = ground_cost(src_[i].p, snk_[j].p, p_);
        // move the artificial arc currently at pos to the back
        tail_.push_back(tail_[pos]);
        head_.push_back(head_[pos]);
        acost_.push_back(acost_[pos]);
        aflow_.push_back(aflow_[pos]);
        in_tree_.push_back(in_tree_[pos]);
        const int moved = static_cast<int>(tail_.size()) - 1;
        const int moved_node = tail_[pos] == root_ ? head_[pos] : tail_[pos];
        if (parent_arc_[moved_node] == static_cast<int>(pos)) parent_arc_[moved_node] = moved;
        tail_[pos] = i;
        head_[pos] = n_ + j;
        acost_[pos] = c;
        aflow_[pos] = 0.0;
        in_tree_[pos] = 0;
        cmax_ = std::max(cmax_, c);
        ++real_end_;
        return static_cast<int>(pos);
    }

    double pivot(int e) {
        const int u = tail_[e], v = head_[e];
        const double rc = acost_[e] - y_[u] + y_[v]; // negative for entering arcs
        // find the join of u and v; record the min residual over arcs whose
        // flow decreases when theta is pushed around the cycle u -> v -> join -> u
        int a = u, b = v;
        double theta = std::numeric_limits<double>::max();
        int leave = -1;
        bool leave_u_side = false;
        while (a != b) {
            const bool u_side = depth_[a] >= depth_[b];
            int& w = u_side ? a : b;
            const int pa = parent_arc_[w];
            const bool decreases = u_side ? (tail_[pa] == w) : (head_[pa] == w);
            if (decreases &&
                (aflow_[pa] < theta || (aflow_[pa] == theta && (leave < 0 || pa < leave)))) {
                theta = aflow_[pa];
                leave = pa;
                leave_u_side = u_side;
            }
            w = parent_[w];
        }
        const int join = a;
        if (leave < 0) throw ConsistencyError("solve_transport: cycle without a leaving arc");
        const double t = theta;

        for (int w = u; w != join; w = parent_[w]) {
            const int pa = parent_arc_[w];
            aflow_[pa] += (tail_[pa] == w) ? -t : t;
        }
        for (int w = v; w != join; w = parent_[w]) {
            const int pa = parent_arc_[w];
            aflow_[pa] += (head_[pa] == w) ? -t : t;
        }
        aflow_[e] = t;

        const int s_ent = leave_u_side ? u : v; // endpoint inside the detached subtree
        const int o_ent = leave_u_side ? v : u;
        int w_out = -1;
        for (int w = s_ent; w != join; w = parent_[w])
            if (parent_arc_[w] == leave) {
                w_out = w;
                break;
            }
        in_tree_[leave] = 0;
        in_tree_[e] = 1;
        reroot(s_ent, w_out, o_ent, e, s_ent == u ? rc : -rc);
        return t;
    }

    // Reverse the parent chain s_ent .. w_out, hang s_ent off o_ent through
    // the entering arc, and shift the re-hung subtree's potentials by delta.
    void reroot(int s_ent, int w_out, int o_ent, int e, double delta) {
        chain_.clear();
        for (int w = s_ent; w != w_out; w = parent_[w]) chain_.push_back(w);
        chain_.push_back(w_out);
        const std::size_t k = chain_.size();
        old_parent_.resize(k);
        old_arc_.resize(k);
        for (std::size_t q = 0; q < k; ++q) {
            old_parent_[q] = parent_[chain_[q]];
            old_arc_[q] = parent_arc_[chain_[q]];
        }
        for (std::size_t q = 0; q < k; ++q) detach(chain_[q], old_parent_[q]);
        parent_[s_ent] = o_ent;
        parent_arc_[s_ent] = e;
        attach(s_ent, o_ent);
        for (std::size_t q = 0; q + 1 < k; ++q) {
            parent_[chain_[q + 1]] = chain_[q];
            parent_arc_[chain_[q + 1]] = old_arc_[q];
            attach(chain_[q + 1], chain_[q]);
        }
        stack_.clear();
        stack_.push_back(s_ent);
        depth_[s_ent] = depth_[o_ent] + 1;
        while (!stack_.empty()) {
            const int w = stack_.back();
            stack_.pop_back();
            y_[w] += delta;
            for (int c = first_child_[w]; c >= 0; c = next_sib_[c]) {
                depth_[c] = depth_[w] + 1;
                stack_.push_back(c);
            }
        }
    }

    const std::vector<Atom>& src_;
    const std::vector<Atom>& snk_;
    double p_;
    int n_, m_, N_;
    int root_;

    std::vector<int> tail_, head_;
    std::vector<double> acost_, aflow_;
    std::vector<std::uint8_t> in_tree_;
    std::unordered_set<std::uint64_t> arc_ids_;
    double cmax_ = 0.0;
    std::size_t real_end_ = 0; // arcs [0, real_end_) are real source->sink arcs

    std::vector<int> parent_, parent_arc_, depth_;
    std::vector<double> y_, supply_;
    std::vector<int> first_child_, next_sib_, prev_sib_;
    std::vector<int> chain_, old_parent_, old_arc_, stack_;
    std::size_t scan_pos_ = 0;
    long long pivots_ = 0;
};

} // namespace

TransportPlan solve_transport(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p,
                              const SolverOptions& options) {
    if (p < 1.0) throw UnsupportedExponentError("solve_transport: p must be >= 1");
    for (const auto& a : mu.atoms)
        if (!(a.w > 0.0)) throw std::invalid_argument("solve_transport: weights must be positive");
    for (const auto& a : nu.atoms)
        if (!(a.w > 0.0)) throw std::invalid_argument("solve_transport: weights must be positive");
    const double tmu = mu.total(), tnu = nu.total();
    if (std::abs(tmu - tnu) > 1e-12 * std::max(tmu, tnu))
        throw BalanceError("solve_transport: measures must carry equal mass");
    if (mu.atoms.size() > options.capacity || nu.atoms.size() > options.capacity)
        throw CapacityError("solve_transport: atom count exceeds solver capacity");
    TransportPlan plan;
    plan.p = p;
    if (mu.atoms.empty()) return plan;

    // canonical orientation makes d(mu,nu) and d(nu,mu) bit-identical
    auto lex_less = [](const DiscreteMeasure& a, const DiscreteMeasure& b) {
        if (a.atoms.size() != b.atoms.size()) return a.atoms.size() < b.atoms.size();
        for (std::size_t k = 0; k < a.atoms.size(); ++k) {
            const auto &x = a.atoms[k], &y = b.atoms[k];
            if (x.p.x != y.p.x) return x.p.x < y.p.x;
            if (x.p.y != y.p.y) return x.p.y < y.p.y;
            if (x.w != y.w) return x.w < y.w;
        }
        return false;
    };
    const bool swapped = lex_less(nu, mu);
    const DiscreteMeasure& A = swapped ? nu : mu;
    const DiscreteMeasure& B = swapped ? mu : nu;

    const std::size_t n = A.atoms.size(), m = B.atoms.size();
    const bool dense = n * m <= options.dense_arc_limit;
    if (!dense && p != 1.0)
        throw CapacityError("solve_transport: exponents p != 1 are solved dense only");

    TransportSimplex simplex(A.atoms, B.atoms, p);
    if (dense) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < m; ++j)
                simplex.add_arc(static_cast<int>(i), static_cast<int>(j));
    } else {
        // nearest-neighbour candidates both ways
        Vec2 lo{std::numeric_limits<double>::max(), std::numeric_limits<double>::max()};
        Vec2 hi{-lo.x, -lo.y};
        for (const auto& a : A.atoms) {
            lo.x = std::min(lo.x, a.p.x);
            lo.y = std::min(lo.y, a.p.y);
            hi.x = std::max(hi.x, a.p.x);
            hi.y = std::max(hi.y, a.p.y);
        }
        for (const auto& a : B.atoms) {
            lo.x = std::min(lo.x, a.p.x);
            lo.y = std::min(lo.y, a.p.y);
            hi.x = std::max(hi.x, a.p.x);
            hi.y = std::max(hi.y, a.p.y);
        }
        const double area = std::max((hi.x - lo.x) * (hi.y - lo.y), 1e-30);
        const double cell = std::sqrt(area / static_cast<double>(n + m));
        PointGrid gb(B.atoms, cell), ga(A.atoms, cell);
        std::vector<int> nb;
        for (std::size_t i = 0; i < n; ++i) {
            gb.nearest(A.atoms[i].p, options.knn, nb);
            for (int j : nb) simplex.add_arc(static_cast<int>(i), j);
        }
        for (std::size_t j = 0; j < m; ++j) {
            ga.nearest(B.atoms[j].p, options.knn, nb);
            for (int i : nb) simplex.add_arc(i, static_cast<int>(j));
        }
    }
    simplex.build_initial_basis();
    const bool debug = std::getenv("MKLAB_SOLVER_DEBUG") != nullptr;
    for (int round = 0; round < 64; ++round) {
        const auto t0 = std::chrono::steady_clock::now();
        simplex.optimize();
        const auto t1 = std::chrono::steady_clock::now();
        if (debug)
            std::fprintf(stderr, "round %d: %zu arcs, %lld pivots, optimize %.2fs\n", round,
                         simplex.arc_count(), simplex.pivot_count(),
                         std::chrono::duration<double>(t1 - t0).count());
        if (dense) break;
        const std::size_t added = simplex.add_violated_arcs();
        if (debug) {
            const auto t2 = std::chrono::steady_clock::now();
            std::fprintf(stderr, "  scan %.2fs, %zu arcs added\n",
                         std::chrono::duration<double>(t2 - t1).count(), added);
        }
        if (added == 0) break;
    }
    simplex.finalize(plan);

    if (swapped) {
        for (auto& e : plan.entries) std::swap(e.i, e.j);
        std::sort(plan.entries.begin(), plan.entries.end(),
                  [](const PlanEntry& a, const PlanEntry& b) {
                      return a.i != b.i ? a.i < b.i : a.j < b.j;
                  });
    }
    return plan;
}

DualPotential recover_dual(const TransportPlan& plan, const DiscreteMeasure& mu,
                           const DiscreteMeasure& nu) {
    if (plan.p != 1.0)
        throw UnsupportedExponentError("recover_dual: only the p = 1 ground cost has this dual");
    const std::size_t n = mu.atoms.size(), m = nu.atoms.size();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> fs(n, nan), ft(m, nan);
    std::vector<int> comp_s(n, -1), comp_t(m, -1);

    std::vector<std::vector<std::pair<int, double>>> adj_s(n), adj_t(m);
    for (const auto& e : plan.entries) {
        const double c = dist(mu.atoms[e.i].p, nu.atoms[e.j].p);
        adj_s[e.i].push_back({e.j, c});
        adj_t[e.j].push_back({e.i, c});
    }

    // propagate phi along plan entries, one component at a time
    int ncomp = 0;
    for (std::size_t seed = 0; seed < n; ++seed) {
        if (comp_s[seed] >= 0) continue;
        const int k = ncomp++;
        comp_s[seed] = k;
        fs[seed] = 0.0;
        std::vector<std::pair<bool, int>> stack{{true, static_cast<int>(seed)}};
        while (!stack.empty()) {
            auto [is_src, v] = stack.back();
            stack.pop_back();
            if (is_src) {
                for (auto [j, c] : adj_s[v]) {
                    const double val = fs[v] - c;
                    if (comp_t[j] < 0) {
                        comp_t[j] = k;
                        ft[j] = val;
                        stack.push_back({false, j});
                    } else if (std::abs(ft[j] - val) > 1e-9) {
                        throw ConsistencyError("recover_dual: plan is not supported on rays");
                    }
                }
            } else {
                for (auto [i, c] : adj_t[v]) {
                    const double val = ft[v] + c;
                    if (comp_s[i] < 0) {
                        comp_s[i] = k;
                        fs[i] = val;
                        stack.push_back({true, i});
                    } else if (std::abs(fs[i] - val) > 1e-9) {
                        throw ConsistencyError("recover_dual: plan is not supported on rays");
                    }
                }
            }
        }
    }
    for (std::size_t j = 0; j < m; ++j)
        if (comp_t[j] < 0) {
            comp_t[j] = ncomp++;
            ft[j] = 0.0;
        }

    // component shifts from the difference constraints
    // s_a - s_b <= min over i in a, j in b of (c_ij - fs_i + ft_j)
    std::vector<double> shift(ncomp, 0.0);
    if (ncomp > 1) {
        std::vector<std::vector<double>> w(
            ncomp, std::vector<double>(ncomp, std::numeric_limits<double>::infinity()));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < m; ++j) {
                const int a = comp_s[i], b = comp_t[j];
                if (a == b) continue;
                const double slack = dist(mu.atoms[i].p, nu.atoms[j].p) - fs[i] + ft[j];
                w[a][b] = std::min(w[a][b], slack);
            }
        // Bellman-Ford on the constraint graph
        for (int pass = 0; pass < ncomp; ++pass) {
            bool changed = false;
            for (int a = 0; a < ncomp; ++a)
                for (int b = 0; b < ncomp; ++b) {
                    if (!std::isfinite(w[a][b])) continue;
                    if (shift[a] > shift[b] + w[a][b] + 1e-15) {
                        shift[a] = shift[b] + w[a][b];
                        changed = true;
                    }
                }
            if (!changed) break;
            if (pass == ncomp - 1)
                throw ConsistencyError("recover_dual: inconsistent component constraints");
        }
    }
    for (std::size_t i = 0; i < n; ++i) fs[i] += shift[comp_s[i]];
    for (std::size_t j = 0; j < m; ++j) ft[j] += shift[comp_t[j]];

    // close under the Lipschitz cone of the target values
    DualPotential phi;
    phi.phi_source.resize(n);
    phi.phi_target.resize(m);
    auto cone = [&](const Vec2& z) {
        double v = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < m; ++j)
            v = std::min(v, dist(z, nu.atoms[j].p) + ft[j]);
        return v;
    };
    for (std::size_t i = 0; i < n; ++i) phi.phi_source[i] = cone(mu.atoms[i].p);
    for (std::size_t j = 0; j < m; ++j) phi.phi_target[j] = cone(nu.atoms[j].p);

    // the reconstruction must reproduce the ray criterion on plan entries
    for (const auto& e : plan.entries) {
        const double c = dist(mu.atoms[e.i].p, nu.atoms[e.j].p);
        if (std::abs(phi.phi_source[e.i] - phi.phi_target[e.j] - c) > 1e-9)
            throw ConsistencyError("recover_dual: dual criterion fails on a plan entry");
    }
    return phi;
}

double duality_check(const DualPotential& phi, const DiscreteMeasure& mu,
                     const DiscreteMeasure& nu, double cost) {
    const std::size_t n = mu.atoms.size(), m = nu.atoms.size();
    if (phi.phi_source.size() != n || phi.phi_target.size() != m)
        throw InvalidPotentialError("duality_check: potential size mismatch");
    auto lip = [&](const Vec2& a, double fa, const Vec2& b, double fb) {
        if (std::abs(fa - fb) > dist(a, b) + 1e-9)
            throw InvalidPotentialError("duality_check: potential is not Lipschitz-1");
    };
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = i + 1; k < n; ++k)
            lip(mu.atoms[i].p, phi.phi_source[i], mu.atoms[k].p, phi.phi_source[k]);
    for (std::size_t j = 0; j < m; ++j)
        for (std::size_t k = j + 1; k < m; ++k)
            lip(nu.atoms[j].p, phi.phi_target[j], nu.atoms[k].p, phi.phi_target[k]);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j)
            lip(mu.atoms[i].p, phi.phi_source[i], nu.atoms[j].p, phi.phi_target[j]);
    KahanSum k;
    for (std::size_t i = 0; i < n; ++i) k.add(phi.phi_source[i] * mu.atoms[i].w);
    for (std::size_t j = 0; j < m; ++j) k.add(-phi.phi_target[j] * nu.atoms[j].w);
    return cost - k.value();
}

void save_plan_csv(const TransportPlan& plan, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_plan_csv: cannot open " + path);
    out.precision(17);
    out << "i,j,mass\n";
    for (const auto& e : plan.entries) out << e.i << "," << e.j << "," << e.mass << "\n";
}

TransportPlan load_plan_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_plan_csv: cannot open " + path);
    TransportPlan plan;
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string si, sj, sm;
        std::getline(ss, si, ',');
        std::getline(ss, sj, ',');
        std::getline(ss, sm, ',');
        plan.entries.push_back({std::stoi(si), std::stoi(sj), std::stod(sm)});
    }
    return plan;
}

MonotoneMap1D monotone_transport_1d(const Density1D& fplus, const Density1D& fminus,
                                    bool reverse_target) {
    for (double v : fplus.values)
        if (v < 0.0 || v > 1.0 + 1e-9)
            throw std::invalid_argument("monotone_transport_1d: densities must lie in [0,1]");
    for (double v : fminus.values)
        if (v < 0.0 || v > 1.0 + 1e-9)
            throw std::invalid_argument("monotone_transport_1d: densities must lie in [0,1]");
    const double mp = fplus.total(), mm = fminus.total();
    if (std::abs(mp - mm) > 1e-12 * std::max({mp, mm, 1e-300}))
        throw BalanceError("monotone_transport_1d: densities must carry equal mass");

    // piecewise-linear position-of-mass profiles x(m) for both densities
    struct Piece {
        double m0, m1;    // mass interval
        double x0, slope; // x(m) = x0 + slope (m - m0)
    };
    auto profile = [](const Density1D& f, bool reversed, double total) {
        std::vector<Piece> ps;
        double mcum = reversed ? total : 0.0;
        for (std::size_t k = 0; k < f.values.size(); ++k) {
            const double v = f.values[k];
            if (v <= 0.0) continue;
            const double cell_mass = v * f.dx;
            const double x0 = f.origin + k * f.dx;
            if (!reversed) {
                ps.push_back({mcum, mcum + cell_mass, x0, 1.0 / v});
                mcum += cell_mass;
            } else {
                // mass counted from the top: the cell covers [mcum-cell, mcum]
                // with x decreasing across it
                ps.push_back({mcum - cell_mass, mcum, x0 + f.dx, -1.0 / v});
                mcum -= cell_mass;
            }
        }
        if (reversed) std::reverse(ps.begin(), ps.end());
        return ps;
    };
    const auto P = profile(fplus, false, mp);
    const auto Q = profile(fminus, reverse_target, mp);

    MonotoneMap1D out;
    // exact integral of |xQ(m) - xP(m)| over the merged piece boundaries;
    // both profiles are linear between boundaries, so each slice integrates
    // in closed form (with a sign-change split where the gap crosses zero)
    KahanSum cost;
    std::size_t a = 0, b = 0;
    double m = 0.0;
    const double mtiny = 1e-15 * std::max(mp, 1e-300);
    while (a < P.size() && b < Q.size()) {
        const double m1 = std::min(P[a].m1, Q[b].m1);
        if (m1 > m) {
            const double xa = P[a].x0 + P[a].slope * (m - P[a].m0);
            const double xb = Q[b].x0 + Q[b].slope * (m - Q[b].m0);
            const double g0 = xb - xa;
            const double g1 = (Q[b].x0 + Q[b].slope * (m1 - Q[b].m0)) -
                              (P[a].x0 + P[a].slope * (m1 - P[a].m0));
            const double len = m1 - m;
            if (g0 * g1 >= 0.0) {
                cost.add(0.5 * std::abs(g0 + g1) * len);
            } else {
                const double split = g0 / (g0 - g1); // zero crossing
                cost.add(0.5 * (std::abs(g0) * split + std::abs(g1) * (1.0 - split)) * len);
            }
            m = m1;
        }
        bool advanced = false;
        if (P[a].m1 <= m + mtiny) {
            ++a;
            advanced = true;
        }
        if (b < Q.size() && Q[b].m1 <= m + mtiny) {
            ++b;
            advanced = true;
        }
        if (!advanced) {
            if (P[a].m1 <= Q[b].m1) ++a;
            else ++b;
        }
    }
    out.cost = cost.value();

    // map sampled at the source cell centers
    out.map_at_centers.assign(fplus.values.size(), std::numeric_limits<double>::quiet_NaN());
    double mcum = 0.0;
    std::size_t q = 0;
    for (std::size_t k = 0; k < fplus.values.size(); ++k) {
        const double v = fplus.values[k];
        if (v <= 0.0) continue;
        const double mc = mcum + 0.5 * v * fplus.dx;
        while (q + 1 < Q.size() && Q[q].m1 < mc) ++q;
        const auto& piece = Q[q];
        const double mclamp = std::clamp(mc, piece.m0, piece.m1);
        out.map_at_centers[k] = piece.x0 + piece.slope * (mclamp - piece.m0);
        mcum += v * fplus.dx;
    }
    return out;
}

} // namespace mklab
