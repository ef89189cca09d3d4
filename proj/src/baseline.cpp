#include "amdiv/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "amdiv/errors.hpp"

namespace amdiv {

namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

// linear interpolation of v over increasing x; linear extrapolation outside
double interp(const std::vector<double>& x, const std::vector<double>& v, double xi) {
    const std::size_t n = x.size();
    if (n == 1) return v[0];
    std::size_t i;
    if (xi <= x[0]) {
        i = 0;
    } else if (xi >= x[n - 1]) {
        i = n - 2;
    } else {
        i = static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), xi) - x.begin()) - 1;
    }
    const double w = (xi - x[i]) / (x[i + 1] - x[i]);
    return v[i] + w * (v[i + 1] - v[i]);
}

}  // namespace

const char* to_string(DividendHandling h) {
    switch (h) {
        case DividendHandling::LumpSum: return "lumpsum";
        case DividendHandling::Shift: return "shift";
        case DividendHandling::ContinuousOnly: return "continuous";
    }
    return "?";
}

TreeAverages tree_averages(const Model& m) {
    const double T = m.T();
    return {m.int_r(0.0, T) / T, m.int_q(0.0, T) / T, std::sqrt(m.int_sigma2(0.0, T) / T)};
}

double TreeBoundary::sb_at(double tq) const {
    if (t.empty()) return kNaN;
    if (tq <= t.front()) return sb.front();
    if (tq >= t.back()) return sb.back();
    const std::size_t i = static_cast<std::size_t>(std::upper_bound(t.begin(), t.end(), tq) - t.begin()) - 1;
    const double w = (tq - t[i]) / (t[i + 1] - t[i]);
    if (w == 0.0) return sb[i];
    return (1.0 - w) * sb[i] + w * sb[i + 1];
}

void TreeBoundary::write_csv(std::ostream& os, const Model& m) const {
    os << "t,tau,y,S_B,status,is_dividend_node\n";
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double tau = m.tau_of_t(t[i]);
        const bool ok = std::isfinite(sb[i]) && sb[i] > 0.0;
        double y = kNaN;
        if (ok) {
            const double x = std::log(m.alpha(tau) * sb[i] / m.K());
            y = kind == OptionKind::Put ? x : -x;
        }
        os << fmt(t[i]) << ',' << fmt(tau) << ',' << (ok ? fmt(y) : "nan") << ',' << (ok ? fmt(sb[i]) : "nan") << ','
           << (ok ? "found" : "none") << ",0\n";
    }
}

TreeResult tree_solve(const Model& m, const TreeSpec& ts) {
    const int n = ts.n_time;
    if (n < 1) throw DomainError("tree needs at least one step");
    const OptionSpec& spec = m.spec();
    const double T = spec.T, K = spec.K;
    const bool put = spec.kind == OptionKind::Put;
    const TreeAverages av = tree_averages(m);
    const double dt = T / n;
    const double u = std::exp(av.sigma * std::sqrt(dt)), d = 1.0 / u;
    const double p = (std::exp((av.r - av.q) * dt) - d) / (u - d);
    const double disc = std::exp(-av.r * dt);
    if (!(p > 0.0 && p < 1.0)) throw DomainError("tree probability outside (0,1); increase n_time");

    TreeResult out;
    const MarketModel& mk = m.market();
    const bool use_discrete = ts.handling != DividendHandling::ContinuousOnly;

    // ex-layer of every discrete dividend
    auto layer_of = [&](double t) { return std::clamp<long>(std::lround(t / dt), 1, n); };
    std::vector<double> prop_factor(n + 1, 1.0);  // product of (1-d) for ex-dates at or before layer i
    std::vector<double> cash_at(n + 1, 0.0);
    if (use_discrete) {
        for (const auto& pd : mk.prop_divs) {
            const long L = layer_of(pd.t);
            for (long i = L; i <= n; ++i) prop_factor[i] *= 1.0 - pd.fraction;
        }
        for (const auto& cd : mk.cash_divs) cash_at[layer_of(cd.t)] += cd.amount;
    }
    // growth factor of the dividend-free spot between layers i and j >= i (tree units)
    auto growth = [&](int i, int j) {
        return std::exp((av.r - av.q) * (j - i) * dt) * prop_factor[j] / prop_factor[i];
    };
    // present value at layer i (after any dividend paid at i) of later cash dividends
    std::vector<double> pv(n + 1, 0.0);
    if (ts.handling == DividendHandling::Shift) {
        for (int i = 0; i <= n; ++i)
            for (int j = i + 1; j <= n; ++j)
                if (cash_at[j] > 0.0) pv[i] += cash_at[j] / growth(i, j);
    }
    double X0 = spec.S;
    if (ts.handling == DividendHandling::Shift) {
        X0 -= pv[0] + cash_at[0];
        if (!(X0 > 0.0)) throw DomainError("escrowed spot is not positive");
    }

    auto payoff = [&](double S) { return put ? std::max(K - S, 0.0) : std::max(S - K, 0.0); };
    // lattice spot (ex-dividend side at layer i)
    auto lattice = [&](int i, int j) { return X0 * std::pow(u, i - 2 * j) * prop_factor[i]; };

    std::vector<double> V(n + 1), S(n + 1);
    for (int j = 0; j <= n; ++j) V[j] = payoff(lattice(n, j) + pv[n]);
    out.boundary.kind = spec.kind;
    out.boundary.t.assign(n + 1, kNaN);
    out.boundary.sb.assign(n + 1, kNaN);
    out.boundary.t[n] = T;
    out.boundary.sb[n] = K;
    bool clipped = false;

    std::vector<double> cont(n + 1), ex(n + 1), lx(n + 1), lv(n + 1);
    for (int i = n - 1; i >= 0; --i) {
        for (int j = 0; j <= i; ++j) {
            cont[j] = disc * (p * V[j] + (1.0 - p) * V[j + 1]);
            S[j] = lattice(i, j) + pv[i];
            ex[j] = payoff(S[j]);
            V[j] = ts.american ? std::max(cont[j], ex[j]) : cont[j];
        }
        // proportional dividend at layer i: the cum spot is S/(1-d) on the same node
        double f = prop_factor[i] / (i > 0 ? prop_factor[i - 1] : 1.0);
        if (i == 0) f = prop_factor[0];
        const bool prop_here = f != 1.0;
        const bool cash_here = ts.handling == DividendHandling::LumpSum && cash_at[i] > 0.0;
        const bool shift_cash = ts.handling == DividendHandling::Shift && cash_at[i] > 0.0;
        // boundary on the ex side
        if (ts.american) {
            int idx = -1;
            if (put) {
                for (int j = 0; j <= i; ++j)
                    if (ex[j] > 0.0 && ex[j] >= cont[j]) {
                        idx = j;
                        break;
                    }
                if (idx >= 0) {
                    double b = S[idx];
                    if (idx > 0) {
                        const double d1 = ex[idx - 1] - cont[idx - 1], d2 = ex[idx] - cont[idx];
                        if (d2 - d1 != 0.0) b = S[idx] + (S[idx - 1] - S[idx]) * d2 / (d2 - d1);
                    }
                    out.boundary.sb[i] = b;
                }
            } else {
                for (int j = i; j >= 0; --j)
                    if (ex[j] > 0.0 && ex[j] >= cont[j]) {
                        idx = j;
                        break;
                    }
                if (idx >= 0) {
                    double b = S[idx];
                    if (idx < i) {
                        const double d1 = ex[idx + 1] - cont[idx + 1], d2 = ex[idx] - cont[idx];
                        if (d2 - d1 != 0.0) b = S[idx] + (S[idx + 1] - S[idx]) * d2 / (d2 - d1);
                    }
                    out.boundary.sb[i] = b;
                }
            }
        }
        out.boundary.t[i] = i * dt;
        if (prop_here || cash_here || shift_cash) {
            // value on the cum side of the ex-date
            if (cash_here) {
                for (int j = 0; j <= i; ++j) {
                    lx[i - j] = S[j];
                    lv[i - j] = V[j];
                }
                lx.resize(i + 1);
                lv.resize(i + 1);
            }
            for (int j = 0; j <= i; ++j) {
                double Sc = S[j] / f;
                double v = V[j];
                if (cash_here) {
                    Sc = lattice(i, j) / f;
                    const double Sx = Sc * f - cash_at[i];
                    if (Sx <= 0.0) {
                        clipped = true;
                        v = payoff(0.0);
                    } else {
                        v = interp(lx, lv, Sx);
                    }
                } else if (shift_cash) {
                    Sc = (lattice(i, j) + pv[i] + cash_at[i]) / f;
                }
                V[j] = ts.american ? std::max(v, payoff(Sc)) : v;
            }
            if (cash_here) {
                lx.resize(n + 1);
                lv.resize(n + 1);
            }
        }
    }
    if (clipped) out.warnings.push_back("lump-sum tree: spot fell to or below zero after a dividend; clipped");
    out.price = V[0];
    out.boundary.exists =
        std::any_of(out.boundary.sb.begin(), out.boundary.sb.end() - 1, [](double v) { return std::isfinite(v); });
    return out;
}

double tree_price(const Model& m, const TreeSpec& ts) { return tree_solve(m, ts).price; }

BoundaryComparison compare_boundaries(const BoundaryCurve& git, const TreeBoundary& tree, double K,
                                      int exclude_final) {
    if (git.kind != tree.kind) throw DomainError("compare_boundaries: option kinds differ");
    BoundaryComparison c;
    double sum = 0.0;
    for (std::size_t k = 0; k < git.t.size(); ++k) {
        const double st = tree.sb_at(git.t[k]);
        c.t.push_back(git.t[k]);
        c.sb_git.push_back(git.sb[k]);
        c.sb_tree.push_back(st);
        if (static_cast<int>(k) < exclude_final) continue;
        if (git.grid.kind(k) != NodeKind::Regular) {
            ++c.skipped_dividend;
            continue;
        }
        if (!std::isfinite(st)) {
            ++c.skipped_undefined;
            continue;
        }
        const double d = std::abs(git.sb[k] - st) / K;
        c.max_dev = std::max(c.max_dev, d);
        sum += d;
        ++c.compared;
    }
    if (c.compared > 0) c.mean_dev = sum / c.compared;
    return c;
}

TreeBoundary tree_boundary(const Model& m, const TreeSpec& ts) { return tree_solve(m, ts).boundary; }

}  // namespace amdiv
