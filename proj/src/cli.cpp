#include "varsel/cli.hpp"

#include "varsel/kernels.hpp"
#include "varsel/outer.hpp"
#include "varsel/predict.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>
#include <random>
#include <set>

namespace varsel {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string format_bayes_factor(double bf) { return fmt::format("{:.3e}", bf); }

std::array<int, 6> cutoff_counts(const Eigen::VectorXd &pip) {
    std::array<int, 6> counts{};
    for (std::size_t c = 0; c < kPipCutoffs.size(); ++c)
        counts[c] = static_cast<int>((pip.array() > kPipCutoffs[c]).count());
    return counts;
}

std::vector<Eigen::Index> credible_set(const Eigen::VectorXd &w, double level) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(w.size()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return w(a) > w(b); });
    std::vector<Eigen::Index> out;
    double mass = 0;
    for (const Eigen::Index j : order) {
        out.push_back(j);
        mass += w(j);
        if (mass >= level) break;
    }
    return out;
}

// --- simulation ------------------------------------------------------------

SimulatedData simulate(const SimulationSpec &spec) {
    if (spec.n < 2) throw ValidationError("n must be at least 2");
    if (spec.p < 1) throw ValidationError("p must be at least 1");
    if (spec.n_causal < 0 || spec.n_causal > spec.p)
        throw ValidationError("n_causal must be between 0 and p");
    if (!(spec.pve > 0 && spec.pve < 1)) throw ValidationError("pve must lie strictly between 0 and 1");
    if (!(spec.rho >= 0 && spec.rho < 1)) throw ValidationError("rho must lie in [0, 1)");
    if (spec.block_size < 1) throw ValidationError("block size must be at least 1");

    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    SimulatedData out;
    out.X.resize(spec.n, spec.p);
    const double a = std::sqrt(spec.rho), b = std::sqrt(1.0 - spec.rho);
    Eigen::VectorXd shared(spec.n);
    for (Eigen::Index j = 0; j < spec.p; ++j) {
        if (j % spec.block_size == 0)
            for (Eigen::Index i = 0; i < spec.n; ++i) shared(i) = normal(rng);
        for (Eigen::Index i = 0; i < spec.n; ++i) out.X(i, j) = a * shared(i) + b * normal(rng);
    }

    // Partial Fisher-Yates for the causal set.
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(spec.p));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    for (Eigen::Index k = 0; k < spec.n_causal; ++k) {
        std::uniform_int_distribution<Eigen::Index> pick(k, spec.p - 1);
        std::swap(idx[static_cast<std::size_t>(k)], idx[static_cast<std::size_t>(pick(rng))]);
    }
    out.causal.assign(idx.begin(), idx.begin() + spec.n_causal);
    std::sort(out.causal.begin(), out.causal.end());

    out.effects.resize(spec.n_causal);
    std::bernoulli_distribution coin(0.5);
    for (Eigen::Index k = 0; k < spec.n_causal; ++k)
        out.effects(k) = spec.normal_effects ? normal(rng) : (coin(rng) ? 1.0 : -1.0);

    Eigen::VectorXd g = Eigen::VectorXd::Zero(spec.n);
    for (Eigen::Index k = 0; k < spec.n_causal; ++k)
        g += out.effects(k) * out.X.col(out.causal[static_cast<std::size_t>(k)]);
    const double gmean = g.mean();
    const double gvar = (g.array() - gmean).square().sum() / static_cast<double>(spec.n - 1);
    const bool gaussian = spec.family == Family::gaussian;
    // Binomial effects are scaled on the logistic liability scale.
    const double target =
        gaussian ? spec.pve : spec.pve / (1.0 - spec.pve) * std::numbers::pi * std::numbers::pi / 3.0;
    if (spec.n_causal > 0) {
        if (!(gvar > 0)) throw NumericalError("simulated genetic component has zero variance");
        const double scale = std::sqrt(target / gvar);
        out.effects *= scale;
        g *= scale;
    }

    out.y.resize(spec.n);
    if (gaussian) {
        const double noise_sd = spec.n_causal > 0 ? std::sqrt(1.0 - spec.pve) : 1.0;
        for (Eigen::Index i = 0; i < spec.n; ++i) out.y(i) = g(i) + noise_sd * normal(rng);
    } else {
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        for (Eigen::Index i = 0; i < spec.n; ++i)
            out.y(i) = unif(rng) < sigmoid(out.intercept + g(i)) ? 1.0 : 0.0;
    }
    return out;
}

// --- summary -----------------------------------------------------------------

namespace {

double weighted_quantile_of_mixture(const Eigen::VectorXd &w, const Eigen::VectorXd &mu,
                                    const Eigen::VectorXd &s2, double prob) {
    const auto cdf = [&](double x) {
        double total = 0;
        for (Eigen::Index j = 0; j < w.size(); ++j) {
            const double sd = std::sqrt(std::max(s2(j), 0.0));
            total += w(j) * (sd > 0 ? 0.5 * std::erfc(-(x - mu(j)) / (sd * std::sqrt(2.0)))
                                    : (x >= mu(j) ? 1.0 : 0.0));
        }
        return total;
    };
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (Eigen::Index j = 0; j < w.size(); ++j) {
        const double sd = std::sqrt(std::max(s2(j), 0.0));
        lo = std::min(lo, mu(j) - 10 * sd);
        hi = std::max(hi, mu(j) + 10 * sd);
    }
    for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        (cdf(mid) < prob ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double sample_quantile(std::vector<double> v, double prob) {
    std::sort(v.begin(), v.end());
    const double h = (static_cast<double>(v.size()) - 1) * prob;
    const auto k = static_cast<std::size_t>(std::floor(h));
    if (k + 1 >= v.size()) return v.back();
    return v[k] + (h - static_cast<double>(k)) * (v[k + 1] - v[k]);
}

std::string interval_text(double lo, double hi) {
    const double scale = std::max(std::abs(lo), std::abs(hi));
    int decimals = 3;
    if (scale > 0 && std::isfinite(scale))
        decimals = std::max(3, 1 - static_cast<int>(std::floor(std::log10(scale))));
    return fmt::format("[{:+.{}f},{:+.{}f}]", lo, decimals, hi, decimals);
}

struct HyperRow {
    std::string name;
    std::string estimate = "NA";
    std::string interval = "[NA,NA]";
    std::string candidates;
};

HyperRow hyper_row(const std::string &name, const Eigen::VectorXd &values,
                   const Eigen::VectorXd &w, bool show_estimate, std::string candidates,
                   bool fixed_decimals = false) {
    HyperRow row{name, "NA", "[NA,NA]", std::move(candidates)};
    if (show_estimate) {
        row.estimate = fmt::format("{:#.3g}", values.dot(w));
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (const Eigen::Index j : credible_set(w, 0.95)) {
            lo = std::min(lo, values(j));
            hi = std::max(hi, values(j));
        }
        row.interval = fixed_decimals ? fmt::format("[{:.2f},{:.2f}]", lo, hi)
                                      : fmt::format("[{:.3g},{:.3g}]", lo, hi);
    }
    return row;
}

bool all_equal(const Eigen::VectorXd &v) {
    return v.size() == 0 || (v.array() == v(0)).all();
}

std::string pad_right(const std::string &s, std::size_t width) {
    return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

std::string pad_left(const std::string &s, std::size_t width) {
    return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

std::string yes_no(bool b) { return b ? "yes" : "no"; }

}  // namespace

std::string format_summary(const FitArchive &a, int nv) {
    const ModelFit &f = a.fit;
    const bool gaussian = f.family == Family::gaussian;
    const Eigen::Index ns = f.w.size();
    const auto p = static_cast<Eigen::Index>(a.variable_names.size());
    std::string s;
    s += "Summary of fitted Bayesian variable selection model:\n";
    s += fmt::format("{:<12}{:<11}num. hyperparameter settings: {}\n", "family:", to_string(f.family), ns);
    s += fmt::format("{:<12}{:<11}iid variable selection prior: {}\n", "samples:", a.n,
                     yes_no(a.grid.exchangeable()));
    s += fmt::format("{:<12}{:<11}fit prior var. of coefs (sa): {}\n", "variables:", p,
                     yes_no(a.fitted_sa));
    if (gaussian) {
        s += fmt::format("{:<12}{:<11}fit residual var. (sigma):    {}\n", "covariates:", a.m,
                         yes_no(a.fitted_sigma));
    } else {
        if (a.m > 1) s += fmt::format("{:<12}{}\n", "covariates:", a.m);
        s += fmt::format("fit approx. factors (eta):    {}\n", yes_no(a.fitted_eta));
    }
    s += fmt::format("maximum log-likelihood lower bound: {:.4f}\n", f.grid.logw.maxCoeff());
    if (gaussian && f.model_pve_samples && f.model_pve_samples->size() > 0) {
        const Eigen::VectorXd &v = *f.model_pve_samples;
        const std::vector<double> draws(v.data(), v.data() + v.size());
        s += fmt::format("proportion of variance explained: {:.3f} [{:.3f},{:.3f}]\n", v.mean(),
                         sample_quantile(draws, 0.025), sample_quantile(draws, 0.975));
    }

    std::vector<HyperRow> rows;
    const auto range_text = [](const Eigen::VectorXd &v) {
        return fmt::format("{:.3g}--{:.3g}", v.minCoeff(), v.maxCoeff());
    };
    if (gaussian) {
        if (a.fitted_sigma)
            rows.push_back(hyper_row("sigma", f.grid.sigma_hat, f.w, true, "NA--NA"));
        else
            rows.push_back(hyper_row("sigma", *a.grid.sigma, f.w, !all_equal(*a.grid.sigma),
                                     range_text(*a.grid.sigma)));
    }
    if (a.fitted_sa)
        rows.push_back(hyper_row("sa", f.grid.sa_hat, f.w, true, "NA--NA"));
    else
        rows.push_back(hyper_row("sa", *a.grid.sa, f.w, !all_equal(*a.grid.sa), range_text(*a.grid.sa)));
    // Per-variable priors are summarized by their mean over variables.
    const Eigen::VectorXd lo_values = a.grid.logodds.colwise().mean().transpose();
    rows.push_back(hyper_row("logodds", lo_values, f.w, !all_equal(lo_values) || ns == 1,
                             fmt::format("({:.2f})--({:.2f})", lo_values.minCoeff(),
                                         lo_values.maxCoeff()),
                             true));
    std::size_t est_w = 8, int_w = 7;
    for (const auto &r : rows) {
        est_w = std::max(est_w, r.estimate.size());
        int_w = std::max(int_w, r.interval.size());
    }
    s += "Hyperparameters:\n";
    s += fmt::format("{:<8}{:>{}} {:<{}} {}\n", "", "estimate", est_w, "Pr>0.95", int_w,
                     "candidate values");
    for (const auto &r : rows)
        s += fmt::format("{:<8}{:>{}} {:<{}} {}\n", r.name, r.estimate, est_w, r.interval, int_w,
                         r.candidates);

    s += "Selected variables by probability cutoff:\n";
    const auto counts = cutoff_counts(f.pip);
    std::string head, body;
    for (std::size_t c = 0; c < counts.size(); ++c) {
        head += fmt::format("{}>{:.2f}", c ? " " : "", kPipCutoffs[c]);
        body += fmt::format("{}{:>5}", c ? " " : "", counts[c]);
    }
    s += head + "\n" + body + "\n";

    const Eigen::Index shown = std::min<Eigen::Index>(nv, p);
    std::vector<Eigen::Index> order(static_cast<std::size_t>(p));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index x, Eigen::Index y) { return f.pip(x) > f.pip(y); });
    s += fmt::format("Top {} variables by inclusion probability:\n", shown);

    const Eigen::MatrixXd mu = f.grid.mu_matrix();
    const Eigen::MatrixXd s2 = f.grid.s2_matrix();
    std::vector<std::array<std::string, 7>> table;
    table.push_back({"", "index", "variable", "prob", "PVE", gaussian ? "coef" : "coef*",
                     "Pr(coef.>0.95)"});
    for (Eigen::Index k = 0; k < shown; ++k) {
        const Eigen::Index i = order[static_cast<std::size_t>(k)];
        const Eigen::VectorXd mu_i = mu.row(i).transpose();
        const Eigen::VectorXd s2_i = s2.row(i).transpose();
        const double coef = mu_i.dot(f.w);
        const double lo = weighted_quantile_of_mixture(f.w, mu_i, s2_i, 0.025);
        const double hi = weighted_quantile_of_mixture(f.w, mu_i, s2_i, 0.975);
        const std::string pve = f.pve ? fmt::format("{:.4f}", f.pve->row(i).dot(f.w)) : "NA";
        table.push_back({std::to_string(k + 1), std::to_string(i + 1),
                         a.variable_names[static_cast<std::size_t>(i)], fmt::format("{:.4f}", f.pip(i)),
                         pve, fmt::format("{:#.3g}", coef), interval_text(lo, hi)});
    }
    std::array<std::size_t, 7> width{};
    for (const auto &row : table)
        for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
    for (const auto &row : table) {
        std::string line;
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) line += ' ';
            line += c + 1 == row.size() ? pad_right(row[c], width[c]) : pad_left(row[c], width[c]);
        }
        while (!line.empty() && line.back() == ' ') line.pop_back();
        s += line + "\n";
    }
    if (!gaussian) s += "*See README about interpreting coefficients in logistic regression.\n";
    return s;
}

// --- command implementations ---------------------------------------------------

namespace {

std::vector<double> parse_value_list(const std::string &text, const std::string &flag) {
    try {
        if (text.find(':') != std::string::npos) return parse_grid_spec(text);
        std::vector<double> out;
        for (const auto &field : split_fields(text, ',')) {
            const auto v = parse_number(field);
            if (!v) throw UsageError("");
            out.push_back(*v);
        }
        return out;
    } catch (const std::exception &) {
        throw UsageError("invalid value list for " + flag + ": '" + text + "'");
    }
}

Eigen::VectorXd to_vector(const std::vector<double> &v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

LoadOptions load_options(const std::string &delim) {
    LoadOptions o;
    if (delim.empty()) return o;
    if (delim == "tab" || delim == "\\t") o.delimiter = '\t';
    else if (delim == "comma") o.delimiter = ',';
    else if (delim == "space") o.delimiter = ' ';
    else if (delim.size() == 1) o.delimiter = delim[0];
    else throw UsageError("unrecognized delimiter '" + delim + "'");
    return o;
}

Eigen::MatrixXd load_covariates(const std::string &path, const LoadOptions &lo) {
    if (path.empty()) return Eigen::MatrixXd();
    return load_matrix(path, lo).values;
}

struct FitArgs {
    std::string x, y, z, family = "gaussian", logodds, logodds_file, sigma, sa, out = "fit.varsel",
                         delim;
    double n0 = 10, sa0 = 1, tol = 1e-4;
    int maxiter = 10000, nr = 1000, nv = 5;
    std::uint64_t seed = 1;
    bool no_init = false;
};

int cmd_fit(const FitArgs &args, std::ostream &out, std::ostream &err) {
    const LoadOptions lo = load_options(args.delim);
    const Family family = [&] {
        try {
            return family_from_string(args.family);
        } catch (const std::exception &) {
            throw UsageError("--family must be gaussian or binomial");
        }
    }();
    LabeledMatrix X = load_matrix(args.x, lo);
    const LabeledMatrix Y = load_matrix(args.y, lo);
    if (Y.values.cols() != 1) throw ValidationError(args.y + ": expected a single column");
    const Dataset data = validate_dataset(X.values, load_covariates(args.z, lo), Y.values.col(0), family);

    Eigen::MatrixXd logodds;
    if (!args.logodds_file.empty()) {
        logodds = load_matrix(args.logodds_file, lo).values;
    } else {
        const std::vector<double> v =
            args.logodds.empty() ? default_logodds(data.p()) : parse_value_list(args.logodds, "--logodds");
        logodds = to_vector(v).transpose();
    }
    std::optional<Eigen::VectorXd> sigma, sa;
    if (!args.sigma.empty()) sigma = to_vector(parse_value_list(args.sigma, "--sigma"));
    if (!args.sa.empty()) sa = to_vector(parse_value_list(args.sa, "--sa"));
    const HyperGrid grid = make_grid(data, sigma, sa, logodds);

    FitOptions opts;
    opts.tol = args.tol;
    opts.maxiter = args.maxiter;
    opts.n0 = args.n0;
    opts.sa0 = args.sa0;
    opts.nr = args.nr;
    opts.seed = args.seed;
    opts.initialize_params = !args.no_init;

    FitArchive archive;
    archive.fit = fit(data, grid, opts);
    archive.grid = grid;
    archive.design_digest = design_digest(data);
    archive.n = data.n();
    archive.m = data.m();
    archive.fitted_sigma = family == Family::gaussian && !grid.sigma;
    archive.fitted_sa = !grid.sa;
    archive.fitted_eta = family == Family::binomial && opts.optimize_eta;
    archive.variable_names = X.names;
    const nlohmann::json echo = {{"family", to_string(family)},
                                 {"tol", opts.tol},
                                 {"maxiter", opts.maxiter},
                                 {"n0", opts.n0},
                                 {"sa0", opts.sa0},
                                 {"nr", opts.nr},
                                 {"seed", opts.seed},
                                 {"initialize_params", opts.initialize_params},
                                 {"optimize_eta", opts.optimize_eta}};
    archive.options_json = echo.dump();

    const auto &conv = archive.fit.grid.converged;
    const auto unconverged = std::count(conv.begin(), conv.end(), false);
    if (unconverged > 0)
        err << "warning: " << unconverged << " of " << conv.size()
            << " grid points did not converge within " << opts.maxiter << " iterations\n";
    save_archive(archive, args.out);
    out << format_summary(archive, args.nv);
    return exit_ok;
}

int cmd_predict(const std::string &archive_path, const std::string &x_path,
                const std::string &z_path, const std::string &delim, std::ostream &out,
                std::ostream &err) {
    const FitArchive a = load_archive(archive_path);
    const LoadOptions lo = load_options(delim);
    const Eigen::MatrixXd X = load_matrix(x_path, lo).values;
    const Eigen::MatrixXd Zu = load_covariates(z_path, lo);
    const auto p = static_cast<Eigen::Index>(a.variable_names.size());
    if (X.rows() == 0) {
        if (X.cols() != 0 && X.cols() != p)
            throw ValidationError("X has " + std::to_string(X.cols()) + " columns, model expects " +
                                  std::to_string(p));
        return exit_ok;
    }
    if (X.cols() == p && (Zu.size() == 0 || Zu.rows() == X.rows())) {
        Dataset d;
        d.X = X;
        d.Z.resize(X.rows(), 1 + (Zu.size() > 0 ? Zu.cols() : 0));
        d.Z.col(0).setOnes();
        if (Zu.size() > 0) d.Z.rightCols(Zu.cols()) = Zu;
        if (d.m() == a.m && design_digest(d) == a.design_digest)
            err << "note: predicting on the training data\n";
    }
    if (a.fit.family == Family::gaussian) {
        const Eigen::VectorXd yhat = predict_linear(a.fit, X, Zu);
        for (Eigen::Index i = 0; i < yhat.size(); ++i) out << format_double(yhat(i)) << '\n';
    } else {
        const BinaryPrediction pr = predict_logistic(a.fit, X, Zu);
        for (Eigen::Index i = 0; i < pr.prob.size(); ++i)
            out << format_double(pr.prob(i)) << ',' << pr.label(i) << '\n';
    }
    return exit_ok;
}

// Orders "2" before "10" and "chr2" before "chr10".
bool natural_less(const std::string &a, const std::string &b) {
    const auto na = parse_number(a), nb = parse_number(b);
    if (na && nb) return *na < *nb || (*na == *nb && a < b);
    if (na || nb) return static_cast<bool>(na);
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (std::isdigit(static_cast<unsigned char>(a[i])) && std::isdigit(static_cast<unsigned char>(b[j]))) {
            std::size_t ie = i, je = j;
            while (ie < a.size() && std::isdigit(static_cast<unsigned char>(a[ie]))) ++ie;
            while (je < b.size() && std::isdigit(static_cast<unsigned char>(b[je]))) ++je;
            std::string da = a.substr(i, ie - i), db = b.substr(j, je - j);
            da.erase(0, std::min(da.find_first_not_of('0'), da.size()));
            db.erase(0, std::min(db.find_first_not_of('0'), db.size()));
            if (da.size() != db.size()) return da.size() < db.size();
            if (da != db) return da < db;
            i = ie;
            j = je;
        } else {
            if (a[i] != b[j]) return a[i] < b[j];
            ++i;
            ++j;
        }
    }
    return a.size() - i < b.size() - j || (a.size() - i == b.size() - j && a < b);
}

int cmd_plot_data(const std::string &archive_path, const std::string &groups_path,
                  const std::string &vars, const std::string &out_path, std::ostream &out) {
    const FitArchive a = load_archive(archive_path);
    const auto &names = a.variable_names;
    std::map<std::string, std::size_t> index_of;
    for (std::size_t i = 0; i < names.size(); ++i) index_of.emplace(names[i], i);

    const std::string missing = "NA";
    std::vector<std::string> group(names.size(), groups_path.empty() ? "all" : missing);
    if (!groups_path.empty()) {
        const std::string text = read_file(groups_path);
        std::size_t lineno = 0, start = 0;
        char delim = 0;
        while (start < text.size()) {
            std::size_t end = text.find('\n', start);
            if (end == std::string::npos) end = text.size();
            std::string line = text.substr(start, end - start);
            start = end + 1;
            ++lineno;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.find_first_not_of(" \t") == std::string::npos) continue;
            if (delim == 0) delim = line.find('\t') != std::string::npos ? '\t' : ',';
            const auto fields = split_fields(line, delim);
            if (fields.size() != 2)
                throw ValidationError(groups_path + ": line " + std::to_string(lineno) +
                                      ": expected 2 fields");
            const auto it = index_of.find(fields[0]);
            if (it == index_of.end()) {
                if (lineno == 1) continue;  // header
                throw ValidationError(groups_path + ": line " + std::to_string(lineno) +
                                      ": unknown variable '" + fields[0] + "'");
            }
            group[it->second] = fields[1];
        }
    }
    std::vector<bool> highlight(names.size(), false);
    if (!vars.empty()) {
        for (const auto &v : split_fields(vars, ',')) {
            const auto it = index_of.find(v);
            if (it == index_of.end()) throw ValidationError("unknown variable '" + v + "'");
            highlight[it->second] = true;
        }
    }

    std::vector<std::size_t> order(names.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        const bool xm = group[x] == missing && !groups_path.empty();
        const bool ym = group[y] == missing && !groups_path.empty();
        if (xm != ym) return ym;
        if (group[x] != group[y]) return natural_less(group[x], group[y]);
        return x < y;
    });
    std::string text = "index,name,group,pip,beta_mean,highlight\n";
    for (const std::size_t i : order) {
        const auto ei = static_cast<Eigen::Index>(i);
        text += std::to_string(i + 1) + ',' + names[i] + ',' + group[i] + ',' +
                format_double(a.fit.pip(ei)) + ',' + format_double(a.fit.beta_mean(ei)) + ',' +
                (highlight[i] ? "1" : "0") + '\n';
    }
    if (out_path.empty()) out << text;
    else write_file(out_path, text);
    return exit_ok;
}

void write_simulation(const SimulatedData &sim, const std::string &prefix) {
    std::string x;
    for (Eigen::Index j = 0; j < sim.X.cols(); ++j) x += (j ? ",X" : "X") + std::to_string(j + 1);
    x += '\n';
    for (Eigen::Index i = 0; i < sim.X.rows(); ++i) {
        for (Eigen::Index j = 0; j < sim.X.cols(); ++j) {
            if (j) x += ',';
            x += format_double(sim.X(i, j));
        }
        x += '\n';
    }
    write_file(prefix + "_X.csv", x);
    std::string y = "y\n";
    for (Eigen::Index i = 0; i < sim.y.size(); ++i) y += format_double(sim.y(i)) + '\n';
    write_file(prefix + "_y.csv", y);
    std::string t = "index,name,effect\n";
    for (std::size_t k = 0; k < sim.causal.size(); ++k)
        t += std::to_string(sim.causal[k] + 1) + ",X" + std::to_string(sim.causal[k] + 1) + ',' +
             format_double(sim.effects(static_cast<Eigen::Index>(k))) + '\n';
    write_file(prefix + "_truth.csv", t);
}

}  // namespace

int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
    CLI::App app{"Bayesian variable selection by variational inference", "varsel"};
    app.require_subcommand(1);

    FitArgs fa;
    auto *fit_cmd = app.add_subcommand("fit", "fit a model over a hyperparameter grid");
    fit_cmd->add_option("--x", fa.x, "candidate variables (n x p)")->required();
    fit_cmd->add_option("--y", fa.y, "outcome (n x 1)")->required();
    fit_cmd->add_option("--z", fa.z, "covariates (n x m), intercept added automatically");
    fit_cmd->add_option("--family", fa.family, "gaussian or binomial")->capture_default_str();
    auto *lo_opt = fit_cmd->add_option("--logodds", fa.logodds, "LO:HI:STEP or comma list (base 10)");
    auto *lof_opt = fit_cmd->add_option("--logodds-file", fa.logodds_file, "p x n_s log-odds matrix");
    lo_opt->excludes(lof_opt);
    fit_cmd->add_option("--sigma", fa.sigma, "residual variance values");
    fit_cmd->add_option("--sa", fa.sa, "prior variance values");
    fit_cmd->add_option("--n0", fa.n0)->capture_default_str();
    fit_cmd->add_option("--sa0", fa.sa0)->capture_default_str();
    fit_cmd->add_option("--tol", fa.tol)->capture_default_str();
    fit_cmd->add_option("--maxiter", fa.maxiter)->capture_default_str();
    fit_cmd->add_option("--nr", fa.nr, "PVE posterior draws")->capture_default_str();
    fit_cmd->add_option("--seed", fa.seed)->capture_default_str();
    fit_cmd->add_option("--nv", fa.nv, "variables listed in the summary")->capture_default_str();
    fit_cmd->add_flag("--no-init-stage", fa.no_init, "skip the second, warm-started pass");
    fit_cmd->add_option("--out", fa.out, "archive path")->capture_default_str();
    fit_cmd->add_option("--delim", fa.delim, "comma, tab, space or a single character");

    std::string archive_path, x_path, z_path, delim, out_path, groups, vars, null_path, alt_path;
    int nv = 5;
    auto *summary_cmd = app.add_subcommand("summary", "print the summary of a fitted model");
    summary_cmd->add_option("archive", archive_path)->required();
    summary_cmd->add_option("--nv", nv)->capture_default_str();

    auto *predict_cmd = app.add_subcommand("predict", "predict outcomes for new samples");
    predict_cmd->add_option("archive", archive_path)->required();
    predict_cmd->add_option("--x", x_path)->required();
    predict_cmd->add_option("--z", z_path);
    predict_cmd->add_option("--delim", delim);

    auto *bf_cmd = app.add_subcommand("bf", "Bayes factor of ALT against NULL");
    bf_cmd->add_option("null", null_path)->required();
    bf_cmd->add_option("alt", alt_path)->required();

    auto *plot_cmd = app.add_subcommand("plot-data", "export per-variable results for plotting");
    plot_cmd->add_option("archive", archive_path)->required();
    plot_cmd->add_option("--groups", groups, "two columns: variable name, group label");
    plot_cmd->add_option("--vars", vars, "comma-separated variables to highlight");
    plot_cmd->add_option("--out", out_path);

    SimulationSpec spec;
    std::string sim_family = "gaussian", effects = "equal", prefix;
    auto *sim_cmd = app.add_subcommand("simulate", "write a simulated data set");
    sim_cmd->add_option("--n", spec.n)->capture_default_str();
    sim_cmd->add_option("--p", spec.p)->capture_default_str();
    sim_cmd->add_option("--n-causal", spec.n_causal)->capture_default_str();
    sim_cmd->add_option("--pve", spec.pve)->capture_default_str();
    sim_cmd->add_option("--family", sim_family)->capture_default_str();
    sim_cmd->add_option("--seed", spec.seed)->capture_default_str();
    sim_cmd->add_option("--rho", spec.rho, "within-block correlation")->capture_default_str();
    sim_cmd->add_option("--block-size", spec.block_size)->capture_default_str();
    sim_cmd->add_option("--effects", effects, "equal or normal")->capture_default_str();
    sim_cmd->add_option("--out-prefix", prefix)->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError &e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    }

    kernels::configure_threads_from_env();
    try {
        if (*fit_cmd) return cmd_fit(fa, out, err);
        if (*summary_cmd) {
            if (nv < 0) throw UsageError("--nv must be nonnegative");
            out << format_summary(load_archive(archive_path), nv);
            return exit_ok;
        }
        if (*predict_cmd) return cmd_predict(archive_path, x_path, z_path, delim, out, err);
        if (*bf_cmd) {
            out << format_bayes_factor(bayes_factor(load_archive(null_path).fit,
                                                    load_archive(alt_path).fit))
                << '\n';
            return exit_ok;
        }
        if (*plot_cmd) return cmd_plot_data(archive_path, groups, vars, out_path, out);
        if (*sim_cmd) {
            if (sim_family != "gaussian" && sim_family != "binomial")
                throw UsageError("--family must be gaussian or binomial");
            if (effects != "equal" && effects != "normal")
                throw UsageError("--effects must be equal or normal");
            spec.family = family_from_string(sim_family);
            spec.normal_effects = effects == "normal";
            write_simulation(simulate(spec), prefix);
            return exit_ok;
        }
    } catch (const UsageError &e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const ValidationError &e) {
        err << "error: " << e.what() << '\n';
        return exit_data;
    } catch (const NumericalError &e) {
        err << "error: " << e.what() << '\n';
        return exit_numerical;
    } catch (const std::bad_alloc &) {
        err << "error: out of memory\n";
        return exit_numerical;
    } catch (const std::exception &e) {
        err << "error: " << e.what() << '\n';
        return exit_data;
    }
    return exit_usage;
}

}  // namespace varsel
