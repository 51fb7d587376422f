#include "varsel/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cstdlib>
#include <string>
#include <vector>

namespace varsel::kernels {

namespace {

// Row blocks for the row-oriented kernels. Block boundaries only change which
// thread owns a row, never the order in which a row accumulates.
constexpr Eigen::Index kRowBlock = 256;

}  // namespace

Eigen::VectorXd xt_v(const Eigen::MatrixXd &X, const Eigen::VectorXd &v) {
    const Eigen::Index p = X.cols();
    Eigen::VectorXd out(p);
#pragma omp parallel for schedule(static)
    for (Eigen::Index j = 0; j < p; ++j) out(j) = X.col(j).dot(v);
    return out;
}

Eigen::VectorXd col_sumsq(const Eigen::MatrixXd &X) {
    const Eigen::Index p = X.cols();
    Eigen::VectorXd out(p);
#pragma omp parallel for schedule(static)
    for (Eigen::Index j = 0; j < p; ++j) out(j) = X.col(j).squaredNorm();
    return out;
}

Eigen::VectorXd col_weighted_sumsq(const Eigen::MatrixXd &X, const Eigen::VectorXd &d) {
    const Eigen::Index p = X.cols();
    Eigen::VectorXd out(p);
#pragma omp parallel for schedule(static)
    for (Eigen::Index j = 0; j < p; ++j)
        out(j) = (d.array() * X.col(j).array().square()).sum();
    return out;
}

Eigen::MatrixXd left_multiply(const Eigen::MatrixXd &G, const Eigen::MatrixXd &X) {
    const Eigen::Index p = X.cols();
    Eigen::MatrixXd out(G.rows(), p);
#pragma omp parallel for schedule(static)
    for (Eigen::Index j = 0; j < p; ++j)
        for (Eigen::Index k = 0; k < G.rows(); ++k) out(k, j) = G.row(k).dot(X.col(j).transpose());
    return out;
}

Eigen::VectorXd x_times(const Eigen::MatrixXd &X, const Eigen::VectorXd &r) {
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
    const Eigen::Index nblocks = (n + kRowBlock - 1) / kRowBlock;
#pragma omp parallel for schedule(static)
    for (Eigen::Index b = 0; b < nblocks; ++b) {
        const Eigen::Index start = b * kRowBlock;
        const Eigen::Index len = std::min(kRowBlock, n - start);
        auto seg = out.segment(start, len);
        for (Eigen::Index j = 0; j < p; ++j)
            if (r(j) != 0.0) seg += r(j) * X.col(j).segment(start, len);
    }
    return out;
}

void project_out(Eigen::MatrixXd &X, const Eigen::MatrixXd &Q) {
    const Eigen::Index p = X.cols();
#pragma omp parallel for schedule(static)
    for (Eigen::Index j = 0; j < p; ++j) {
        const Eigen::VectorXd coef = Q.transpose() * X.col(j);
        X.col(j).noalias() -= Q * coef;
    }
}

Eigen::VectorXd row_residual_variance(const Eigen::MatrixXd &X, const Eigen::MatrixXd &Z,
                                      const Eigen::MatrixXd &C, const Eigen::VectorXd &v) {
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
    const Eigen::Index nblocks = (n + kRowBlock - 1) / kRowBlock;
#pragma omp parallel for schedule(static)
    for (Eigen::Index b = 0; b < nblocks; ++b) {
        const Eigen::Index start = b * kRowBlock;
        const Eigen::Index len = std::min(kRowBlock, n - start);
        auto seg = out.segment(start, len);
        const auto Zb = Z.middleRows(start, len);
        Eigen::VectorXd fitted(len);
        for (Eigen::Index j = 0; j < p; ++j) {
            if (v(j) == 0.0) continue;
            fitted.noalias() = Zb * C.col(j);
            seg.array() += v(j) * (X.col(j).segment(start, len) - fitted).array().square();
        }
    }
    return out;
}

ResidualMoments residual_moments(const Eigen::MatrixXd &X, const Eigen::MatrixXd &Z,
                                 const Eigen::MatrixXd &C, const Eigen::VectorXd &d,
                                 const Eigen::VectorXd &v) {
    const Eigen::Index p = X.cols();
    ResidualMoments out{Eigen::VectorXd(p), Eigen::VectorXd(p), Eigen::VectorXd(p)};
#pragma omp parallel
    {
        Eigen::VectorXd e(X.rows());
#pragma omp for schedule(static)
        for (Eigen::Index j = 0; j < p; ++j) {
            e.noalias() = X.col(j) - Z * C.col(j);
            out.resid_wss(j) = (d.array() * e.array().square()).sum();
            out.resid_dot(j) = v.dot(e);
            out.raw_wss(j) = (d.array() * X.col(j).array().square()).sum();
        }
    }
    return out;
}

void set_max_threads(int n) {
    omp_set_num_threads(n > 0 ? n : omp_get_num_procs());
}

void configure_threads_from_env() {
    const char *env = std::getenv("VARSEL_THREADS");
    int n = 0;
    if (env != nullptr) {
        try {
            n = std::stoi(env);
        } catch (const std::exception &) {
            n = 0;
        }
    }
    set_max_threads(std::max(n, 0));
}

int max_threads() { return omp_get_max_threads(); }

namespace serial {

Eigen::VectorXd xt_v(const Eigen::MatrixXd &X, const Eigen::VectorXd &v) {
    Eigen::VectorXd out(X.cols());
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        double acc = 0;
        for (Eigen::Index i = 0; i < X.rows(); ++i) acc += X(i, j) * v(i);
        out(j) = acc;
    }
    return out;
}

Eigen::VectorXd col_sumsq(const Eigen::MatrixXd &X) {
    Eigen::VectorXd out(X.cols());
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        double acc = 0;
        for (Eigen::Index i = 0; i < X.rows(); ++i) acc += X(i, j) * X(i, j);
        out(j) = acc;
    }
    return out;
}

Eigen::VectorXd col_weighted_sumsq(const Eigen::MatrixXd &X, const Eigen::VectorXd &d) {
    Eigen::VectorXd out(X.cols());
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        double acc = 0;
        for (Eigen::Index i = 0; i < X.rows(); ++i) acc += d(i) * X(i, j) * X(i, j);
        out(j) = acc;
    }
    return out;
}

Eigen::MatrixXd left_multiply(const Eigen::MatrixXd &G, const Eigen::MatrixXd &X) {
    Eigen::MatrixXd out(G.rows(), X.cols());
    for (Eigen::Index j = 0; j < X.cols(); ++j)
        for (Eigen::Index k = 0; k < G.rows(); ++k) {
            double acc = 0;
            for (Eigen::Index i = 0; i < X.rows(); ++i) acc += G(k, i) * X(i, j);
            out(k, j) = acc;
        }
    return out;
}

Eigen::VectorXd x_times(const Eigen::MatrixXd &X, const Eigen::VectorXd &r) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        double acc = 0;
        for (Eigen::Index j = 0; j < X.cols(); ++j) acc += X(i, j) * r(j);
        out(i) = acc;
    }
    return out;
}

void project_out(Eigen::MatrixXd &X, const Eigen::MatrixXd &Q) {
    const Eigen::Index m = Q.cols();
    std::vector<double> coef(static_cast<std::size_t>(m));
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        for (Eigen::Index k = 0; k < m; ++k) {
            double acc = 0;
            for (Eigen::Index i = 0; i < X.rows(); ++i) acc += Q(i, k) * X(i, j);
            coef[static_cast<std::size_t>(k)] = acc;
        }
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
            double acc = 0;
            for (Eigen::Index k = 0; k < m; ++k) acc += Q(i, k) * coef[static_cast<std::size_t>(k)];
            X(i, j) -= acc;
        }
    }
}

Eigen::VectorXd row_residual_variance(const Eigen::MatrixXd &X, const Eigen::MatrixXd &Z,
                                      const Eigen::MatrixXd &C, const Eigen::VectorXd &v) {
    Eigen::VectorXd out(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        double acc = 0;
        for (Eigen::Index j = 0; j < X.cols(); ++j) {
            double fitted = 0;
            for (Eigen::Index k = 0; k < Z.cols(); ++k) fitted += Z(i, k) * C(k, j);
            const double e = X(i, j) - fitted;
            acc += v(j) * e * e;
        }
        out(i) = acc;
    }
    return out;
}

ResidualMoments residual_moments(const Eigen::MatrixXd &X, const Eigen::MatrixXd &Z,
                                 const Eigen::MatrixXd &C, const Eigen::VectorXd &d,
                                 const Eigen::VectorXd &v) {
    const Eigen::Index p = X.cols();
    ResidualMoments out{Eigen::VectorXd(p), Eigen::VectorXd(p), Eigen::VectorXd(p)};
    for (Eigen::Index j = 0; j < p; ++j) {
        double wss = 0, dot = 0, raw = 0;
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
            double fitted = 0;
            for (Eigen::Index k = 0; k < Z.cols(); ++k) fitted += Z(i, k) * C(k, j);
            const double e = X(i, j) - fitted;
            wss += d(i) * e * e;
            dot += v(i) * e;
            raw += d(i) * X(i, j) * X(i, j);
        }
        out.resid_wss(j) = wss;
        out.resid_dot(j) = dot;
        out.raw_wss(j) = raw;
    }
    return out;
}

}  // namespace serial

}  // namespace varsel::kernels
