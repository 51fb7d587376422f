#include "varsel/core.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <memory>
#include <sstream>

namespace varsel {

std::string to_string(Family f) {
    return f == Family::gaussian ? "gaussian" : "binomial";
}

Family family_from_string(const std::string &s) {
    if (s == "gaussian") return Family::gaussian;
    if (s == "binomial") return Family::binomial;
    throw UsageError("unknown family '" + s + "' (expected gaussian or binomial)");
}

namespace {

void check_finite(const Eigen::MatrixXd &M, const char *name) {
    for (Eigen::Index j = 0; j < M.cols(); ++j)
        for (Eigen::Index i = 0; i < M.rows(); ++i)
            if (!std::isfinite(M(i, j))) {
                std::ostringstream msg;
                msg << name << " has a non-finite entry at row " << i + 1
                    << ", column " << j + 1;
                throw ValidationError(msg.str());
            }
}

}  // namespace

Dataset validate_dataset(Eigen::MatrixXd X, const Eigen::MatrixXd &Z_user,
                         Eigen::VectorXd y, Family family) {
    const Eigen::Index n = y.size();
    if (X.rows() != n)
        throw ValidationError("X has " + std::to_string(X.rows()) +
                              " rows but y has " + std::to_string(n) + " entries");
    if (Z_user.size() > 0 && Z_user.rows() != n)
        throw ValidationError("Z has " + std::to_string(Z_user.rows()) +
                              " rows but y has " + std::to_string(n) + " entries");
    if (n < 2) throw ValidationError("at least 2 samples are required");
    if (X.cols() < 1) throw ValidationError("at least 1 candidate variable is required");

    check_finite(X, "X");
    check_finite(y, "y");
    const Eigen::Index m_user = Z_user.size() > 0 ? Z_user.cols() : 0;
    if (m_user > 0) check_finite(Z_user, "Z");

    if (family == Family::binomial)
        for (Eigen::Index i = 0; i < n; ++i)
            if (y(i) != 0.0 && y(i) != 1.0)
                throw ValidationError("binomial outcome y at row " + std::to_string(i + 1) +
                                      " is not 0 or 1");

    for (Eigen::Index j = 0; j < m_user; ++j) {
        const auto col = Z_user.col(j);
        if ((col.array() == col(0)).all())
            throw ValidationError("covariate column " + std::to_string(j + 1) +
                                  " is constant; the intercept is added automatically");
    }

    Dataset data;
    data.X = std::move(X);
    data.y = std::move(y);
    data.family = family;
    data.Z.resize(n, 1 + m_user);
    data.Z.col(0).setOnes();
    if (m_user > 0) data.Z.rightCols(m_user) = Z_user;
    return data;
}

namespace {

std::string sha256_hex(const Dataset &data, bool with_outcome) {
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                                 &EVP_MD_CTX_free);
    EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
    const std::int64_t header[4] = {data.n(), data.p(), data.m(),
                                    !with_outcome ? -1 : data.family == Family::gaussian ? 0 : 1};
    EVP_DigestUpdate(ctx.get(), header, sizeof(header));
    EVP_DigestUpdate(ctx.get(), data.X.data(), sizeof(double) * data.X.size());
    EVP_DigestUpdate(ctx.get(), data.Z.data(), sizeof(double) * data.Z.size());
    if (with_outcome)
        EVP_DigestUpdate(ctx.get(), data.y.data(), sizeof(double) * data.y.size());
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), md, &len);
    static constexpr char hexdigits[] = "0123456789abcdef";
    std::string hex;
    hex.reserve(2 * len);
    for (unsigned int k = 0; k < len; ++k) {
        hex += hexdigits[md[k] >> 4];
        hex += hexdigits[md[k] & 0xf];
    }
    return hex;
}

}  // namespace

std::string dataset_digest(const Dataset &data) { return sha256_hex(data, true); }

std::string design_digest(const Dataset &data) { return sha256_hex(data, false); }

Eigen::VectorXd HyperGrid::logodds_column(Eigen::Index j, Eigen::Index p) const {
    if (exchangeable()) return Eigen::VectorXd::Constant(p, logodds(0, j));
    return logodds.col(j);
}

namespace {

Eigen::VectorXd broadcast(const Eigen::VectorXd &v, Eigen::Index ns, const char *name) {
    if (v.size() == ns) return v;
    if (v.size() == 1) return Eigen::VectorXd::Constant(ns, v(0));
    throw ValidationError(std::string(name) + " has " + std::to_string(v.size()) +
                          " entries but the grid has " + std::to_string(ns) + " settings");
}

}  // namespace

HyperGrid make_grid(const Dataset &data, std::optional<Eigen::VectorXd> sigma,
                    std::optional<Eigen::VectorXd> sa, Eigen::MatrixXd logodds) {
    if (logodds.size() == 0) throw ValidationError("logodds grid is empty");
    if (logodds.rows() != 1 && logodds.rows() != data.p())
        throw ValidationError("per-variable logodds must have " + std::to_string(data.p()) +
                              " rows, got " + std::to_string(logodds.rows()));
    if (!logodds.allFinite()) throw ValidationError("logodds contains non-finite values");

    HyperGrid grid;
    const Eigen::Index ns = logodds.cols();
    grid.logodds = std::move(logodds);
    if (data.family == Family::binomial) {
        if (sigma) throw ValidationError("sigma is not used for the binomial family");
    } else if (sigma) {
        grid.sigma = broadcast(*sigma, ns, "sigma");
        if (!(grid.sigma->array() > 0).all()) throw ValidationError("sigma must be positive");
    }
    if (sa) {
        grid.sa = broadcast(*sa, ns, "sa");
        if (!(grid.sa->array() > 0).all()) throw ValidationError("sa must be positive");
    }
    return grid;
}

namespace {

Eigen::MatrixXd stack_states(const std::vector<VariationalState> &states,
                             const Eigen::VectorXd VariationalState::*field) {
    if (states.empty()) return {};
    Eigen::MatrixXd M((states.front().*field).size(), static_cast<Eigen::Index>(states.size()));
    for (std::size_t j = 0; j < states.size(); ++j)
        M.col(static_cast<Eigen::Index>(j)) = states[j].*field;
    return M;
}

}  // namespace

Eigen::MatrixXd GridFit::alpha_matrix() const { return stack_states(states, &VariationalState::alpha); }
Eigen::MatrixXd GridFit::mu_matrix() const { return stack_states(states, &VariationalState::mu); }
Eigen::MatrixXd GridFit::s2_matrix() const { return stack_states(states, &VariationalState::s2); }

std::vector<double> default_logodds(Eigen::Index p) {
    // p < 10 would put the lower end above -1; clamp to keep the grid nondecreasing.
    const double lo = std::min(-std::log10(static_cast<double>(p)), -1.0);
    const double hi = -1.0;
    std::vector<double> out(20);
    for (int k = 0; k < 20; ++k) out[k] = lo + (hi - lo) * k / 19.0;
    out.back() = hi;
    return out;
}

std::vector<double> parse_grid_spec(double lo, double hi, double step) {
    if (!(step > 0)) throw UsageError("grid step must be positive");
    if (!(lo <= hi)) throw UsageError("grid lower end exceeds upper end");
    const double span = (hi - lo) / step;
    const double count = std::round(span);
    if (std::abs(span - count) > 1e-9)
        throw UsageError("grid span is not an integer multiple of the step");
    const auto npts = static_cast<std::size_t>(count) + 1;
    std::vector<double> out(npts);
    for (std::size_t k = 0; k < npts; ++k) out[k] = lo + step * static_cast<double>(k);
    out.back() = hi;
    return out;
}

std::vector<double> parse_grid_spec(const std::string &spec) {
    std::vector<double> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = spec.find(':', start);
        const std::string tok = spec.substr(start, pos == std::string::npos ? pos : pos - start);
        const auto v = parse_number(tok);
        if (!v) throw UsageError("malformed grid specification '" + spec + "' (expected LO:HI:STEP)");
        parts.push_back(*v);
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    if (parts.size() == 1) return {parts[0]};
    if (parts.size() != 3)
        throw UsageError("malformed grid specification '" + spec + "' (expected LO:HI:STEP)");
    return parse_grid_spec(parts[0], parts[1], parts[2]);
}

std::optional<double> parse_number(std::string_view text) {
    while (!text.empty() && (text.front() == ' ' || text.front() == '\r')) text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\r')) text.remove_suffix(1);
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    if (text.empty()) return std::nullopt;
    double v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
    return v;
}

double prior_prob(double logodds10) { return 1.0 / (1.0 + std::pow(10.0, -logodds10)); }

double log_prior_prob(double logodds10) {
    return -std::log1p(std::pow(10.0, -logodds10));
}

double log_prior_prob_compl(double logodds10) {
    return -std::log1p(std::pow(10.0, logodds10));
}

double sigmoid(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double log_sigmoid(double x) {
    if (x >= 0) return -std::log1p(std::exp(-x));
    return x - std::log1p(std::exp(x));
}

}  // namespace varsel
