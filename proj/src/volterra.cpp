#include "amdiv/volterra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/tools/roots.hpp>

#include "amdiv/errors.hpp"

namespace amdiv {

namespace {

constexpr double kPi = 3.14159265358979323846;

// index of the first node of the smooth piece ending at n (duplicates split pieces)
std::size_t piece_start(std::span<const double> s, std::size_t n) {
    std::size_t a = n;
    while (a > 0 && s[a - 1] < s[a]) --a;
    return a;
}

double end_slope(std::span<const double> s, std::span<const double> G, std::size_t n) {
    const std::size_t a = piece_start(s, n);
    if (n - a >= 2) {
        const double h1 = s[n - 1] - s[n - 2], h2 = s[n] - s[n - 1];
        return G[n - 2] * h2 / (h1 * (h1 + h2)) - G[n - 1] * (h1 + h2) / (h1 * h2) +
               G[n] * (2.0 * h2 + h1) / (h2 * (h1 + h2));
    }
    if (n - a == 1) return (G[n] - G[n - 1]) / (s[n] - s[n - 1]);
    return 0.0;
}

}  // namespace

TauGrid TauGrid::build(double tau_max, int N, std::vector<GridEvent> events) {
    if (N < 1) throw DomainError("TauGrid needs N >= 1");
    if (!(tau_max > 0.0)) throw DomainError("TauGrid needs tau_max > 0");
    std::sort(events.begin(), events.end(), [](const GridEvent& a, const GridEvent& b) { return a.tau < b.tau; });
    const double h = tau_max / N;
    for (std::size_t i = 0; i < events.size(); ++i) {
        if (!(events[i].tau > 0.0 && events[i].tau < tau_max))
            throw DomainError("dividend image outside (0, tau_max)");
        if (i > 0 && events[i].tau - events[i - 1].tau < 1e-12 * tau_max)
            throw DomainError("two dividends share one date; not supported");
    }

    struct Node {
        double tau;
        int ev;  // index into events, -1 regular
    };
    std::vector<Node> nodes(N + 1);
    for (int j = 0; j <= N; ++j) nodes[j] = {j * h, -1};
    nodes[N].tau = tau_max;

    TauGrid g;
    g.h_ = h;
    g.N_ = N;
    std::vector<Node> extra;
    for (std::size_t i = 0; i < events.size(); ++i) {
        const long m = std::lround(events[i].tau / h);
        if (m > 0 && m < N && nodes[m].ev < 0) {
            g.max_move_ = std::max(g.max_move_, std::abs(nodes[m].tau - events[i].tau));
            nodes[m] = {events[i].tau, static_cast<int>(i)};
        } else {
            extra.push_back({events[i].tau, static_cast<int>(i)});
        }
    }
    nodes.insert(nodes.end(), extra.begin(), extra.end());
    std::stable_sort(nodes.begin(), nodes.end(), [](const Node& a, const Node& b) { return a.tau < b.tau; });

    for (const Node& nd : nodes) {
        if (nd.ev < 0) {
            g.tau_.push_back(nd.tau);
            g.kind_.push_back(NodeKind::Regular);
            g.event_.push_back(-1);
            continue;
        }
        const GridEvent& e = events[nd.ev];
        g.tau_.push_back(nd.tau);
        g.kind_.push_back(e.cash ? NodeKind::CashPre : NodeKind::PropPre);
        g.event_.push_back(e.index);
        g.tau_.push_back(nd.tau);
        g.kind_.push_back(e.cash ? NodeKind::CashPost : NodeKind::PropPost);
        g.event_.push_back(e.index);
    }
    return g;
}

std::size_t TauGrid::segment_start(std::size_t k) const {
    std::size_t a = k;
    while (a > 0 && !is_post(kind_[a])) --a;
    return a;
}

int TauGrid::cash_events() const {
    return static_cast<int>(std::count(kind_.begin(), kind_.end(), NodeKind::CashPre));
}

int TauGrid::prop_events() const {
    return static_cast<int>(std::count(kind_.begin(), kind_.end(), NodeKind::PropPre));
}

double weak_sum(std::span<const double> s, std::span<const double> G) {
    if (s.size() != G.size() || s.empty()) throw DomainError("weak_sum: size mismatch");
    const std::size_t n = s.size() - 1;
    const double tau = s[n];
    const double span = tau - s[0];
    if (n == 0 || span <= 0.0) return 0.0;
    const double gE = G[n];
    const double gp = end_slope(s, G, n);
    auto F = [&](std::size_t i) {
        if (i == n) return 0.0;
        const double d = tau - s[i];
        if (d <= 0.0) return 0.0;
        return (G[i] - gE + gp * d) / std::sqrt(kPi * d);
    };
    double sum = 0.0;
    double fl = F(0);
    for (std::size_t i = 0; i < n; ++i) {
        const double fr = F(i + 1);
        const double w = s[i + 1] - s[i];
        if (w > 0.0) sum += 0.5 * w * (fl + fr);
        fl = fr;
    }
    return sum + 2.0 * gE * std::sqrt(span / kPi) - gp * (2.0 / 3.0) * span * std::sqrt(span / kPi);
}

double regular_weak_sum(std::span<const double> s, std::span<const double> F, double end_limit) {
    if (s.size() != F.size() || s.empty()) throw DomainError("regular_weak_sum: size mismatch");
    const std::size_t n = s.size() - 1;
    const double tau = s[n];
    auto f = [&](std::size_t i) {
        const double d = tau - s[i];
        if (i == n || d <= 0.0) return end_limit;
        return F[i] / std::sqrt(kPi * d);
    };
    double sum = 0.0;
    double fl = f(0);
    for (std::size_t i = 0; i < n; ++i) {
        const double fr = f(i + 1);
        const double w = s[i + 1] - s[i];
        if (w > 0.0) sum += 0.5 * w * (fl + fr);
        fl = fr;
    }
    return sum;
}

double weak_quad(const TauGrid& grid, std::size_t k, std::span<const double> g, std::span<const double> y) {
    if (k >= grid.size()) throw DomainError("weak_quad: node index out of range");
    if (g.size() < k + 1 || y.size() < k + 1) throw DomainError("weak_quad: tabulation shorter than k");
    const double tau = grid.tau(k);
    std::vector<double> G(k + 1);
    for (std::size_t i = 0; i <= k; ++i) {
        const double d = tau - grid.tau(i);
        const double dy = y[k] - y[i];
        if (d > 0.0)
            G[i] = g[i] * std::exp(-dy * dy / (4.0 * d));
        else
            G[i] = dy == 0.0 ? g[i] : 0.0;
    }
    return weak_sum(std::span<const double>(grid.taus().data(), k + 1), G);
}

MarchResult march_and_solve(std::size_t n_nodes, const NodeResidual& R, double y0, const MarchOptions& opt) {
    const double ninf = -std::numeric_limits<double>::infinity();
    MarchResult out;
    out.y.assign(n_nodes, ninf);
    out.found.assign(n_nodes, false);
    out.iterations.assign(n_nodes, 0);
    out.residual.assign(n_nodes, 0.0);
    if (n_nodes == 0) return out;
    out.y[0] = y0;
    out.found[0] = true;
    double guess = y0;
    for (std::size_t k = 1; k < n_nodes; ++k) {
        int evals = 0;
        auto f = [&](double v) {
            ++evals;
            return R(k, v, out.y);
        };
        double a = guess, fa = f(a);
        const double f_guess = fa;
        if (fa == 0.0) {
            out.y[k] = a;
            out.found[k] = true;
            out.iterations[k] = evals;
            continue;
        }
        // widen both sides of the guess together so the root closest to it is taken
        bool bracketed = false;
        double b = a, fb = fa;
        double lo_c = guess, flo_c = f_guess, hi_c = guess, fhi_c = f_guess;
        bool down = true, up = true;
        for (double step = opt.first_step; !bracketed && (down || up); step *= 2.0) {
            if (down) {
                const double c = guess - std::min(step, opt.max_below);
                const double fc = f(c);
                if (std::signbit(fc) != std::signbit(flo_c)) {
                    a = c, fa = fc, b = lo_c, fb = flo_c;
                    bracketed = true;
                    break;
                }
                lo_c = c, flo_c = fc;
                down = step < opt.max_below;
            }
            if (up) {
                const double c = guess + std::min(step, opt.max_above);
                const double fc = f(c);
                if (std::signbit(fc) != std::signbit(fhi_c)) {
                    a = c, fa = fc, b = hi_c, fb = fhi_c;
                    bracketed = true;
                    break;
                }
                hi_c = c, fhi_c = fc;
                up = step < opt.max_above;
            }
        }
        if (!bracketed) {
            out.iterations[k] = evals;
            continue;
        }
        double lo = std::min(a, b), hi = std::max(a, b);
        double flo = lo == a ? fa : fb, fhi = lo == a ? fb : fa;
        boost::uintmax_t iters = opt.max_iterations;
        auto tol = boost::math::tools::eps_tolerance<double>(48);
        const auto root = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, iters);
        const double yk = 0.5 * (root.first + root.second);
        out.y[k] = yk;
        out.found[k] = true;
        out.residual[k] = R(k, yk, out.y);
        out.iterations[k] = static_cast<int>(iters);
        out.max_iterations = std::max(out.max_iterations, out.iterations[k]);
        guess = yk;
    }
    return out;
}

}  // namespace amdiv
