#include "stentx/gpr.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <array>
#include <functional>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "stentx/rng.hpp"

namespace stentx {

namespace {

constexpr double kMinNoise = 1e-8;
constexpr double kMaxJitter = 1e-4;

Eigen::MatrixXd kernel(const Eigen::MatrixXd& sq_dist, const GprHyper& h) {
    return (h.signal_variance * (-sq_dist.array() / (2 * h.length_scale * h.length_scale)).exp()).matrix();
}

// Lexicographic row order on (x, y).
std::vector<Eigen::Index> canonical_order(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(x.rows()));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        for (Eigen::Index j = 0; j < x.cols(); ++j)
            if (x(a, j) != x(b, j)) return x(a, j) < x(b, j);
        if (y(a) != y(b)) return y(a) < y(b);
        return a < b;
    });
    return order;
}

std::vector<Eigen::Index> sample_rows(Eigen::Index n, int limit, Rng& rng) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    if (n > limit) {
        shuffle(idx.begin(), idx.end(), rng);
        idx.resize(static_cast<std::size_t>(limit));
        std::sort(idx.begin(), idx.end());
    }
    return idx;
}

double median_distance(const Eigen::MatrixXd& sq_dist) {
    std::vector<double> d;
    for (Eigen::Index j = 0; j < sq_dist.cols(); ++j)
        for (Eigen::Index i = 0; i < j; ++i) d.push_back(std::sqrt(sq_dist(i, j)));
    if (d.empty()) return 1;
    auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
    std::nth_element(d.begin(), mid, d.end());
    return *mid > 0 ? *mid : 1;
}

struct Box {
    std::array<double, 3> lo, hi;  // log length, log signal, log noise
    int dims = 3;
};

GprHyper to_hyper(const std::array<double, 3>& p, const Box& box, std::optional<double> pinned) {
    auto c = [&](int i) { return std::exp(std::clamp(p[static_cast<std::size_t>(i)], box.lo[static_cast<std::size_t>(i)], box.hi[static_cast<std::size_t>(i)])); };
    return {c(0), c(1), pinned ? *pinned : c(2)};
}

// Nelder-Mead maximization inside the box (points are projected before evaluation).
GprStart nelder_mead(const std::array<double, 3>& start, const Box& box, int max_evals,
                     const std::function<double(const GprHyper&)>& objective, std::optional<double> pinned) {
    const int d = box.dims;
    auto project = [&](std::array<double, 3> p) {
        for (int i = 0; i < 3; ++i) p[static_cast<std::size_t>(i)] = std::clamp(p[static_cast<std::size_t>(i)], box.lo[static_cast<std::size_t>(i)], box.hi[static_cast<std::size_t>(i)]);
        return p;
    };
    GprStart run;
    run.initial = to_hyper(project(start), box, pinned);
    int evals = 0;
    auto eval = [&](const std::array<double, 3>& p) {
        const auto h = to_hyper(p, box, pinned);
        const double v = objective(h);
        ++evals;
        if (run.trace.empty() || v > run.best_lml) {
            run.best_lml = v;
            run.best = h;
        }
        run.trace.push_back(run.best_lml);
        return v;
    };

    std::vector<std::array<double, 3>> pts;
    std::vector<double> vals;
    pts.push_back(project(start));
    vals.push_back(eval(pts[0]));
    run.initial_lml = vals[0];
    for (int i = 0; i < d; ++i) {
        auto p = pts[0];
        const auto k = static_cast<std::size_t>(i);
        p[k] = p[k] + 1.0 <= box.hi[k] ? p[k] + 1.0 : p[k] - 1.0;
        pts.push_back(project(p));
        vals.push_back(eval(pts.back()));
    }

    auto combine = [&](const std::array<double, 3>& a, const std::array<double, 3>& b, double t) {
        std::array<double, 3> r{};
        for (int i = 0; i < 3; ++i) r[static_cast<std::size_t>(i)] = a[static_cast<std::size_t>(i)] + t * (b[static_cast<std::size_t>(i)] - a[static_cast<std::size_t>(i)]);
        return project(r);
    };
    while (evals < max_evals) {
        std::vector<int> order(static_cast<std::size_t>(d + 1));
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return vals[static_cast<std::size_t>(a)] > vals[static_cast<std::size_t>(b)]; });
        const auto best = static_cast<std::size_t>(order.front());
        const auto worst = static_cast<std::size_t>(order.back());
        const auto second = static_cast<std::size_t>(order[static_cast<std::size_t>(d - 1)]);
        if (std::isfinite(vals[best]) && std::abs(vals[best] - vals[worst]) < 1e-9 * (1 + std::abs(vals[best]))) break;

        std::array<double, 3> centroid{};
        for (int i = 0; i <= d; ++i) {
            if (static_cast<std::size_t>(i) == worst) continue;
            for (int k = 0; k < 3; ++k) centroid[static_cast<std::size_t>(k)] += pts[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] / d;
        }
        const auto reflected = combine(centroid, pts[worst], -1.0);
        const double fr = eval(reflected);
        if (fr > vals[best]) {
            const auto expanded = combine(centroid, pts[worst], -2.0);
            const double fe = eval(expanded);
            if (fe > fr) {
                pts[worst] = expanded, vals[worst] = fe;
            } else {
                pts[worst] = reflected, vals[worst] = fr;
            }
        } else if (fr > vals[second]) {
            pts[worst] = reflected, vals[worst] = fr;
        } else {
            const auto contracted = combine(centroid, pts[worst], 0.5);
            const double fc = eval(contracted);
            if (fc > vals[worst]) {
                pts[worst] = contracted, vals[worst] = fc;
            } else {
                for (int i = 0; i <= d; ++i) {
                    const auto k = static_cast<std::size_t>(i);
                    if (k == best) continue;
                    pts[k] = combine(pts[best], pts[k], 0.5);
                    vals[k] = eval(pts[k]);
                }
            }
        }
    }
    return run;
}

}  // namespace

Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    const Eigen::VectorXd na = a.rowwise().squaredNorm();
    const Eigen::VectorXd nb = b.rowwise().squaredNorm();
    Eigen::MatrixXd d = (-2.0 * a * b.transpose()).colwise() + na;
    d.rowwise() += nb.transpose();
    return d.cwiseMax(0.0);
}

double gpr_log_marginal_likelihood(const Eigen::MatrixXd& sq_dist, const Eigen::VectorXd& y, const GprHyper& h) {
    Eigen::MatrixXd k = kernel(sq_dist, h);
    k.diagonal().array() += h.noise_variance;
    Eigen::LLT<Eigen::MatrixXd> llt(k);
    if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
    const Eigen::VectorXd alpha = llt.solve(y);
    const double log_det = 2 * llt.matrixLLT().diagonal().array().log().sum();
    const auto n = static_cast<double>(y.size());
    const double v = -0.5 * y.dot(alpha) - 0.5 * log_det - 0.5 * n * std::log(2 * std::numbers::pi);
    return std::isfinite(v) ? v : -std::numeric_limits<double>::infinity();
}

GprModel fit_gpr(const Eigen::MatrixXd& x_in, const Eigen::VectorXd& y_in, const GprOptions& opt, std::uint64_t seed) {
    if (x_in.rows() < 1 || x_in.rows() != y_in.size()) throw std::invalid_argument("GPR needs matching, nonempty inputs");
    if (!x_in.allFinite() || !y_in.allFinite()) throw std::invalid_argument("GPR input contains non-finite values");
    if (opt.noise_variance && !(*opt.noise_variance >= kMinNoise))
        throw std::invalid_argument("pinned GPR noise variance must be >= 1e-8");

    const auto order = canonical_order(x_in, y_in);
    Eigen::MatrixXd x(x_in.rows(), x_in.cols());
    Eigen::VectorXd y(y_in.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        x.row(static_cast<Eigen::Index>(i)) = x_in.row(order[i]);
        y(static_cast<Eigen::Index>(i)) = y_in(order[i]);
    }

    GprModel m;
    m.input_mean = x.colwise().mean().transpose();
    m.input_scale = ((x.rowwise() - m.input_mean.transpose()).colwise().squaredNorm() /
                     std::max<double>(1, static_cast<double>(x.rows()) - 1))
                        .cwiseSqrt()
                        .transpose();
    for (Eigen::Index j = 0; j < m.input_scale.size(); ++j)
        if (!(m.input_scale(j) > 0)) m.input_scale(j) = 1;
    const Eigen::MatrixXd z = (x.rowwise() - m.input_mean.transpose()).array().rowwise() / m.input_scale.transpose().array();
    m.mean = y.mean();
    const Eigen::VectorXd yc = y.array() - m.mean;
    const double var_y = std::max(yc.squaredNorm() / std::max<double>(1, static_cast<double>(y.size()) - 1), 1e-12);

    Rng rng(derive_seed(seed, 0));
    const auto active = sample_rows(z.rows(), opt.max_active_rows, rng);
    Eigen::MatrixXd za(static_cast<Eigen::Index>(active.size()), z.cols());
    Eigen::VectorXd ya(static_cast<Eigen::Index>(active.size()));
    for (std::size_t i = 0; i < active.size(); ++i) {
        za.row(static_cast<Eigen::Index>(i)) = z.row(active[i]);
        ya(static_cast<Eigen::Index>(i)) = yc(active[i]);
    }
    const auto search = sample_rows(za.rows(), opt.max_search_rows, rng);
    Eigen::MatrixXd zs(static_cast<Eigen::Index>(search.size()), z.cols());
    Eigen::VectorXd ys(static_cast<Eigen::Index>(search.size()));
    for (std::size_t i = 0; i < search.size(); ++i) {
        zs.row(static_cast<Eigen::Index>(i)) = za.row(search[i]);
        ys(static_cast<Eigen::Index>(i)) = ya(search[i]);
    }
    const Eigen::MatrixXd sq_search = squared_distances(zs, zs);

    const double med = median_distance(sq_search);
    Box box;
    box.lo = {std::log(1e-2 * med), std::log(1e-4 * var_y), std::log(kMinNoise)};
    box.hi = {std::log(1e2 * med), std::log(1e4 * var_y), std::log(std::max(var_y, kMinNoise))};
    box.dims = opt.noise_variance ? 2 : 3;

    auto objective = [&](const GprHyper& h) { return gpr_log_marginal_likelihood(sq_search, ys, h); };
    const int starts = std::max(1, opt.starts);
    for (int s = 0; s < starts; ++s) {
        std::array<double, 3> p{};
        if (s == 0) {
            p = {std::log(med), std::log(var_y), std::log(0.1 * var_y)};
        } else {
            Rng srng(derive_seed(seed, static_cast<std::uint64_t>(s) + 1));
            for (std::size_t i = 0; i < 3; ++i) p[i] = uniform(srng, box.lo[i], box.hi[i]);
        }
        m.starts.push_back(nelder_mead(p, box, opt.max_evaluations, objective, opt.noise_variance));
    }
    const auto best = std::max_element(m.starts.begin(), m.starts.end(),
                                       [](const GprStart& a, const GprStart& b) { return a.best_lml < b.best_lml; });
    m.hyper = best->best;
    m.lml = best->best_lml;

    m.inputs = za;
    const Eigen::MatrixXd sq_active = squared_distances(za, za);
    Eigen::MatrixXd k = kernel(sq_active, m.hyper);
    k.diagonal().array() += m.hyper.noise_variance;
    for (double jitter = 0;; jitter = jitter == 0 ? 1e-8 : jitter * 10) {
        if (jitter > kMaxJitter * (1 + 1e-9))
            throw std::runtime_error("GPR kernel matrix is not positive definite after jitter 1e-4");
        Eigen::MatrixXd kj = k;
        kj.diagonal().array() += jitter;
        Eigen::LLT<Eigen::MatrixXd> llt(kj);
        if (llt.info() == Eigen::Success) {
            m.alpha = llt.solve(ya);
            if (m.alpha.allFinite()) {
                m.jitter = jitter;
                break;
            }
        }
    }
    return m;
}

Eigen::VectorXd gpr_predict(const GprModel& m, const Eigen::MatrixXd& x) {
    const Eigen::MatrixXd z = (x.rowwise() - m.input_mean.transpose()).array().rowwise() / m.input_scale.transpose().array();
    const Eigen::MatrixXd ks = kernel(squared_distances(z, m.inputs), m.hyper);
    return (ks * m.alpha).array() + m.mean;
}

}  // namespace stentx
