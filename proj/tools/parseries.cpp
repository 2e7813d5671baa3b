// Command-line front end: simulate data, fit beta, run the Monte Carlo studies.
//
// Exit codes: 0 success, 2 usage / parse / domain error, 3 degenerate likelihood.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "parseries/io.hpp"
#include "parseries/parseries.hpp"

namespace {

using nlohmann::ordered_json;
using namespace parseries;

constexpr int kExitUsage = 2;
constexpr int kExitDegenerate = 3;

/// A finished report: one row per k / per statistic, plus a verdict.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<ordered_json>> rows;
    bool pass = true;
};

std::string csv_cell(const ordered_json& v) {
    if (v.is_number_float()) return io::format_double(v.get<double>());
    if (v.is_string()) return v.get<std::string>();
    if (v.is_null()) return "";
    return v.dump();
}

class Output {
public:
    explicit Output(const std::string& path) {
        if (!path.empty() && path != "-") {
            file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
            if (!*file_) throw domain_error("cannot open '" + path + "' for writing");
        }
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }
    void finish() {
        stream().flush();
        if (file_ && !*file_) throw domain_error("write failed");
    }

private:
    std::unique_ptr<std::ofstream> file_;
};

void emit(const std::string& command, const ordered_json& config, std::uint64_t seed, const Table& t,
          const std::string& format, const std::string& out_path) {
    Output out(out_path);
    auto& os = out.stream();
    if (format == "json") {
        ordered_json doc;
        doc["command"] = command;
        doc["config"] = config;
        doc["seed"] = seed;
        ordered_json rows = ordered_json::array();
        for (const auto& r : t.rows) {
            ordered_json row;
            for (std::size_t i = 0; i < t.columns.size(); ++i) row[t.columns[i]] = r[i];
            rows.push_back(std::move(row));
        }
        doc["rows"] = std::move(rows);
        doc["pass"] = t.pass;
        os << doc.dump(2) << '\n';
    } else {
        ordered_json meta;
        meta["command"] = command;
        meta["config"] = config;
        meta["seed"] = seed;
        meta["pass"] = t.pass;
        os << "# " << meta.dump() << '\n';
        for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
        os << '\n';
        for (const auto& r : t.rows) {
            for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << csv_cell(r[i]);
            os << '\n';
        }
    }
    out.finish();
}

ordered_json mc_row_json(const McReport& r) {
    return ordered_json{{"estimate", r.estimate}, {"std_error", r.std_error},
                        {"target", r.target ? ordered_json(*r.target) : ordered_json()}, {"z", r.z}};
}

Matrix random_pd(std::size_t k, std::uint64_t seed) {
    Engine eng(seed);
    const Matrix g = standard_normal(k, k, eng);
    return g * g.transpose() + 0.5 * Matrix::Identity(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
}

std::optional<DesignMatrix> read_design(const std::string& path, std::size_t n) {
    if (path.empty()) return std::nullopt;
    std::ifstream in(path);
    if (!in) throw parse_error("cannot read design file '" + path + "'");
    DesignMatrix x(io::read_csv(in));
    if (x.rows() != n) throw domain_error("design file has " + std::to_string(x.rows()) + " rows, expected " +
                                          std::to_string(n));
    return x;
}

// Shared option sets --------------------------------------------------------

struct Options {
    std::size_t n = 8;
    std::size_t k = 1;
    std::size_t p = 0;
    double beta = 0.0;
    std::string model = "III";
    std::string sigma = "scalar:1";
    std::string sigma_b;
    std::size_t reps = 50000;
    std::uint64_t seed = 1;
    std::string out;
    std::string in;
    std::string design;
    std::string format = "csv";
    std::string k_list;
    std::string beta_grid;
    std::size_t k_full = 7;
    std::size_t k_sub = 4;
    unsigned workers = 1;
    bool header = false;
};

void add_format(CLI::App* app, Options& o) {
    app->add_option("--out", o.out, "Output path (default: stdout)");
    app->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
}

// Subcommands share one Options struct, so per-command defaults are applied
// after parsing, only for options the user did not give.
template <class T>
void default_if_unset(const CLI::App* app, const char* name, T& field, T value) {
    if (app->count(name) == 0) field = value;
}

void add_mc(CLI::App* app, Options& o, std::size_t default_reps) {
    app->add_option("--reps", o.reps, "Monte Carlo replicates (default " + std::to_string(default_reps) + ")")
        ->check(CLI::Range(2, 100000000));
    app->add_option("--seed", o.seed, "Master seed")->capture_default_str();
    app->add_option("--workers", o.workers, "Worker threads (results do not depend on this)")->capture_default_str();
}

// Commands -------------------------------------------------------------------

int run_simulate(const Options& o) {
    if (o.out.empty()) throw domain_error("simulate needs --out");
    const Ar1Model ar1(o.n);
    const auto bundle = gamma_of(ar1, o.beta);
    const Matrix sigma = build_sigma(io::parse_sigma_spec(o.sigma), o.k);
    Matrix y = sample_gaussian(bundle.gamma, sigma, o.seed);
    const auto x = read_design(o.design, o.n);
    if (x) y += x->matrix() * Matrix::Ones(x->matrix().cols(), y.cols());

    Output out(o.out);
    io::write_csv(out.stream(), y, o.header);
    out.finish();

    ordered_json meta;
    meta["command"] = "simulate";
    meta["config"] = {{"n", o.n}, {"k", o.k}, {"beta", o.beta}, {"sigma", o.sigma}, {"design", o.design},
                      {"header", o.header}, {"out", o.out}};
    meta["seed"] = o.seed;
    meta["pass"] = true;
    Output side(o.out + ".json");
    side.stream() << meta.dump(2) << '\n';
    side.finish();
    return 0;
}

int run_fit(const Options& o) {
    std::ifstream in(o.in);
    if (!in) throw parse_error("cannot read input file '" + o.in + "'");
    const Matrix y = io::read_csv(in, o.header);
    const auto n = static_cast<std::size_t>(y.rows());
    const auto k = static_cast<std::size_t>(y.cols());
    const Ar1Model ar1(n);
    const ModelKind model = parse_model_kind(o.model);
    const auto x = read_design(o.design, n);

    ordered_json doc;
    doc["command"] = "fit";
    doc["config"] = {{"in", o.in}, {"model", o.model}, {"design", o.design}, {"header", o.header}};
    doc["seed"] = nullptr;
    try {
        const auto fit = fit_beta(y, ar1, model, x);
        doc["result"] = {{"beta_hat", fit.beta_hat}, {"se", fit.se},          {"loglik", fit.loglik_at_max},
                         {"model", to_string(model)}, {"n", n},                {"k", k},
                         {"degenerate", false},        {"boundary", fit.boundary}, {"evaluations", fit.evaluations}};
        doc["pass"] = true;
    } catch (const degenerate_likelihood& e) {
        doc["result"] = {{"beta_hat", nullptr}, {"se", nullptr}, {"loglik", nullptr}, {"model", to_string(model)},
                         {"n", n},              {"k", k},        {"degenerate", true}, {"error", e.what()}};
        doc["pass"] = false;
        Output out(o.out);
        out.stream() << doc.dump(2) << '\n';
        out.finish();
        std::cerr << "error: " << e.what() << '\n';
        return kExitDegenerate;
    }
    Output out(o.out);
    out.stream() << doc.dump(2) << '\n';
    out.finish();
    return 0;
}

int run_bartlett(const Options& o) {
    BartlettConfig cfg;
    cfg.n = o.n;
    cfg.k = o.k;
    cfg.p = o.p;
    cfg.beta = o.beta;
    cfg.model = parse_model_kind(o.model);
    cfg.sigma = io::parse_sigma_spec(o.sigma);
    cfg.reps = o.reps;
    cfg.seed = o.seed;
    cfg.workers = o.workers;
    const auto r = bartlett_check(cfg);
    Table t;
    t.columns = {"statistic", "estimate", "std_error", "target", "z"};
    for (const auto& [name, rep] : {std::pair{"mean_score", r.mean_score}, std::pair{"var_score", r.var_score}}) {
        const auto j = mc_row_json(rep);
        t.rows.push_back({name, j["estimate"], j["std_error"], j["target"], j["z"]});
    }
    t.pass = r.mean_score.passes() && r.var_score.passes();
    const ordered_json config = {{"n", o.n},         {"k", o.k},         {"p", o.p},       {"beta", o.beta},
                                 {"model", o.model}, {"sigma", o.sigma}, {"reps", o.reps}, {"seed", o.seed}};
    emit("experiment bartlett", config, o.seed, t, o.format, o.out);
    return 0;
}

int run_info_curve(const Options& o) {
    InfoCurveConfig cfg;
    cfg.n = o.n;
    cfg.p = o.p;
    cfg.beta = o.beta;
    cfg.model = parse_model_kind(o.model);
    cfg.reps = o.reps;
    cfg.seed = o.seed;
    cfg.workers = o.workers;
    const auto curve = info_curve(cfg);
    Table t;
    t.columns = {"k", "formula_info", "mc_info", "mc_se", "z", "mc_mean_score", "mc_mean_se"};
    for (const auto& r : curve.rows) {
        const double z = mc::z_score(r.mc_info, r.mc_se, r.formula_info);
        const double zm = mc::z_score(r.mc_mean_score, r.mc_mean_se, 0.0);
        t.pass = t.pass && std::abs(z) <= 3.0 && std::abs(zm) <= 3.0;
        t.rows.push_back({r.k, r.formula_info, r.mc_info, r.mc_se, z, r.mc_mean_score, r.mc_mean_se});
    }
    const ordered_json config = {{"n", o.n},         {"p", o.p},       {"beta", o.beta},
                                 {"model", o.model}, {"reps", o.reps}, {"seed", o.seed}};
    emit("experiment info-curve", config, o.seed, t, o.format, o.out);
    return 0;
}

int run_deletion(const Options& o) {
    DeletionConfig cfg;
    cfg.n = o.n;
    cfg.k_full = o.k_full;
    cfg.k_sub = o.k_sub;
    cfg.beta = o.beta;
    cfg.reps = o.reps;
    cfg.seed = o.seed;
    cfg.workers = o.workers;
    const auto r = deletion_experiment(cfg);
    Table t;
    t.columns = {"statistic", "value"};
    t.rows = {{"var_full", r.var_full},
              {"var_sub", r.var_sub},
              {"var_ratio", r.var_ratio},
              {"var_ratio_se", r.var_ratio_se},
              {"mse_full", r.mse_full},
              {"mse_sub", r.mse_sub},
              {"mse_ratio", r.mse_ratio},
              {"predicted_ratio", r.predicted_ratio},
              {"used", r.used},
              {"degenerate_full", r.degenerate_full},
              {"degenerate_sub", r.degenerate_sub},
              {"boundary_full", r.boundary_full},
              {"boundary_sub", r.boundary_sub}};
    t.pass = r.predicted_ratio > 1.0 ? r.var_ratio > 1.0 : true;
    const ordered_json config = {{"n", o.n},       {"k_full", o.k_full}, {"k_sub", o.k_sub},
                                 {"beta", o.beta}, {"reps", o.reps},     {"seed", o.seed}};
    emit("experiment deletion", config, o.seed, t, o.format, o.out);
    return 0;
}

int run_degeneracy(const Options& o) {
    DegeneracyConfig cfg;
    cfg.n = o.n;
    cfg.p = o.p;
    cfg.beta = o.beta;
    if (!o.beta_grid.empty()) cfg.beta_grid = io::parse_double_list(o.beta_grid, "--beta-grid");
    cfg.sigma = io::parse_sigma_spec(o.sigma);
    cfg.seed = o.seed;
    const auto r = degeneracy_check(cfg);
    Table t;
    t.columns = {"k", "spread", "scale", "asserted"};
    const std::size_t m = o.n - o.p;
    t.rows = {{m, r.spread_at_m, r.scale_at_m, "constant"},
              {m + 2, r.spread_above, r.scale_above, "reported"},
              {std::size_t{1}, r.spread_single, nullptr, "reported"}};
    t.pass = r.constant_at_m;
    ordered_json grid = ordered_json::array();
    for (double b : cfg.beta_grid) grid.push_back(b);
    const ordered_json config = {{"n", o.n},       {"p", o.p},       {"beta", o.beta},
                                 {"beta_grid", grid}, {"sigma", o.sigma}, {"seed", o.seed}};
    emit("experiment degeneracy", config, o.seed, t, o.format, o.out);
    return 0;
}

int run_sigma_independence(const Options& o) {
    SigmaIndependenceConfig cfg;
    cfg.n = o.n;
    cfg.k = o.k;
    cfg.beta = o.beta;
    cfg.sigma_a = build_sigma(io::parse_sigma_spec(o.sigma), o.k);
    cfg.sigma_b = o.sigma_b.empty() ? random_pd(o.k, derive_seed(o.seed, 0x5167)) :
                                      build_sigma(io::parse_sigma_spec(o.sigma_b), o.k);
    cfg.reps = o.reps;
    cfg.seed = o.seed;
    cfg.workers = o.workers;
    const auto r = sigma_independence_check(cfg);
    Table t;
    t.columns = {"arm", "estimate", "std_error", "target", "z"};
    for (const auto& [name, rep] : {std::pair{"sigma_a", r.var_a}, std::pair{"sigma_b", r.var_b}}) {
        const auto j = mc_row_json(rep);
        t.rows.push_back({name, j["estimate"], j["std_error"], j["target"], j["z"]});
    }
    t.rows.push_back({"difference", r.var_a.estimate - r.var_b.estimate,
                      std::hypot(r.var_a.std_error, r.var_b.std_error), 0.0, r.z_diff});
    t.pass = r.passes();
    ordered_json sb = ordered_json::array();
    for (Eigen::Index i = 0; i < cfg.sigma_b.rows(); ++i)
        for (Eigen::Index j = 0; j < cfg.sigma_b.cols(); ++j) sb.push_back(cfg.sigma_b(i, j));
    const ordered_json config = {{"n", o.n},       {"k", o.k},          {"beta", o.beta}, {"sigma_a", o.sigma},
                                 {"sigma_b", sb},  {"reps", o.reps},    {"seed", o.seed}};
    emit("experiment sigma-independence", config, o.seed, t, o.format, o.out);
    return 0;
}

int run_ut_curve(const Options& o) {
    UtCurveConfig cfg;
    cfg.n = o.n;
    cfg.p = o.p;
    cfg.beta = o.beta;
    cfg.reps = o.reps;
    cfg.seed = o.seed;
    cfg.workers = o.workers;
    const auto curve = ut_info_curve(cfg);
    Table t;
    t.columns = {"k", "mc_info", "mc_se", "increment", "increment_se"};
    for (const auto& r : curve.rows) t.rows.push_back({r.k, r.mc_info, r.mc_se, r.increment, r.increment_se});
    t.pass = curve.non_decreasing;
    const ordered_json config = {{"n", o.n},       {"p", o.p},       {"beta", o.beta},
                                 {"reps", o.reps}, {"seed", o.seed}, {"reml_single_series_info", curve.reml_single_series_info}};
    emit("experiment ut-curve", config, o.seed, t, o.format, o.out);
    return 0;
}

int run_efficiency(const Options& o) {
    const auto ks = io::parse_count_list(o.k_list.empty() ? "1,2,5,10,100,100000" : o.k_list, "--k");
    for (auto k : ks)
        if (k == 0) throw domain_error("--k values must be positive");
    const auto table = efficiency_table(o.n, ks);
    Table t;
    t.columns = {"k", "efficiency"};
    for (const auto& r : table.rows) t.rows.push_back({r.k, r.efficiency});
    t.rows.push_back({"inf", table.limit});
    const ordered_json config = {{"n", o.n}, {"k", ks}};
    emit("experiment efficiency", config, 0, t, o.format, o.out);
    return 0;
}

int run_haar_moments(const Options& o) {
    if (o.n < 2) throw domain_error("haar-moments needs n >= 2");
    const auto r = haar_trace_moments_mc(o.n, o.reps, o.seed, o.workers);
    Table t;
    t.columns = {"moment", "estimate", "std_error", "target", "z"};
    for (std::size_t i = 0; i < 4; ++i) {
        const auto j = mc_row_json(r.reports[i]);
        t.rows.push_back({r.names[i], j["estimate"], j["std_error"], j["target"], j["z"]});
        t.pass = t.pass && r.reports[i].passes();
    }
    const ordered_json config = {{"n", o.n}, {"reps", o.reps}, {"seed", o.seed}};
    emit("experiment haar-moments", config, o.seed, t, o.format, o.out);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Profile and marginal likelihood for parallel Gaussian series"};
    app.require_subcommand(1);
    Options o;
    std::function<int()> action;

    auto* sim = app.add_subcommand("simulate", "Simulate an n x k data matrix with covariance Gamma(beta) (x) Sigma");
    sim->add_option("--n", o.n, "Number of points")->required();
    sim->add_option("--k", o.k, "Number of series")->required();
    sim->add_option("--beta", o.beta, "Autocorrelation")->required();
    sim->add_option("--sigma", o.sigma, "Sigma spec: scalar:v | diag:v,.. | full:.. | green:a,..;b,..")
        ->capture_default_str();
    sim->add_option("--seed", o.seed, "Seed")->capture_default_str();
    sim->add_option("--out", o.out, "Output CSV")->required();
    sim->add_option("--design", o.design, "Design matrix CSV; adds the mean X * 1");
    sim->add_flag("--header", o.header, "Write a column-name row");
    sim->callback([&] { action = [&] { return run_simulate(o); }; });

    auto* fit = app.add_subcommand("fit", "Maximise the profile likelihood for beta");
    fit->add_option("--in", o.in, "Input CSV (rows = points, columns = series)")->required();
    fit->add_option("--model", o.model, "I, II or III")->capture_default_str();
    fit->add_option("--design", o.design, "Design matrix CSV (REML)");
    fit->add_option("--out", o.out, "Output JSON (default: stdout)");
    fit->add_flag("--header", o.header, "Input has a column-name row");
    fit->callback([&] { action = [&] { return run_fit(o); }; });

    auto* exp = app.add_subcommand("experiment", "Run a Monte Carlo study");
    exp->require_subcommand(1);

    auto* bart = exp->add_subcommand("bartlett", "Mean and variance of the score at the true beta");
    bart->add_option("--n", o.n)->capture_default_str();
    bart->add_option("--k", o.k)->capture_default_str();
    bart->add_option("--p", o.p, "Rank of a polynomial design")->capture_default_str();
    bart->add_option("--beta", o.beta)->capture_default_str();
    bart->add_option("--model", o.model)->capture_default_str();
    bart->add_option("--sigma", o.sigma)->capture_default_str();
    add_mc(bart, o, 50000);
    add_format(bart, o);
    bart->callback([&] {
        default_if_unset(bart, "--reps", o.reps, std::size_t{50000});
        action = [&] { return run_bartlett(o); };
    });

    auto* curve = exp->add_subcommand("info-curve", "Fisher information against k, formula and Monte Carlo");
    curve->add_option("--n", o.n)->capture_default_str();
    curve->add_option("--p", o.p)->capture_default_str();
    curve->add_option("--beta", o.beta)->capture_default_str();
    curve->add_option("--model", o.model)->capture_default_str();
    add_mc(curve, o, 50000);
    add_format(curve, o);
    curve->callback([&] {
        default_if_unset(curve, "--reps", o.reps, std::size_t{50000});
        action = [&] { return run_info_curve(o); };
    });

    auto* del = exp->add_subcommand("deletion", "Precision of beta_hat with all series against a random subset");
    del->add_option("--n", o.n)->capture_default_str();
    del->add_option("--k-full", o.k_full)->capture_default_str();
    del->add_option("--k-sub", o.k_sub)->capture_default_str();
    del->add_option("--beta", o.beta);
    add_mc(del, o, 2000);
    add_format(del, o);
    del->callback([&] {
        default_if_unset(del, "--reps", o.reps, std::size_t{2000});
        default_if_unset(del, "--beta", o.beta, 0.4); action = [&] { return run_deletion(o); };
    });

    auto* deg = exp->add_subcommand("degeneracy", "Spread of the model III likelihood over a beta grid");
    deg->add_option("--n", o.n)->capture_default_str();
    deg->add_option("--p", o.p)->capture_default_str();
    deg->add_option("--beta", o.beta, "Beta used to generate the data")->capture_default_str();
    deg->add_option("--beta-grid", o.beta_grid, "Comma-separated grid");
    deg->add_option("--sigma", o.sigma)->capture_default_str();
    deg->add_option("--seed", o.seed)->capture_default_str();
    add_format(deg, o);
    deg->callback([&] { action = [&] { return run_degeneracy(o); }; });

    auto* sig = exp->add_subcommand("sigma-independence", "Model III score variance under two Sigmas");
    sig->add_option("--n", o.n)->capture_default_str();
    sig->add_option("--k", o.k)->capture_default_str();
    sig->add_option("--beta", o.beta)->capture_default_str();
    sig->add_option("--sigma", o.sigma, "First Sigma")->capture_default_str();
    sig->add_option("--sigma-b", o.sigma_b, "Second Sigma (default: random PD from the seed)");
    add_mc(sig, o, 50000);
    add_format(sig, o);
    sig->callback([&] {
        default_if_unset(sig, "--reps", o.reps, std::size_t{50000});
        action = [&] { return run_sigma_independence(o); };
    });

    auto* ut = exp->add_subcommand("ut-curve", "Information of the upper-triangular marginal likelihood against k");
    ut->add_option("--n", o.n)->capture_default_str();
    ut->add_option("--p", o.p)->capture_default_str();
    ut->add_option("--beta", o.beta)->capture_default_str();
    add_mc(ut, o, 50000);
    add_format(ut, o);
    ut->callback([&] {
        default_if_unset(ut, "--reps", o.reps, std::size_t{50000});
        action = [&] { return run_ut_curve(o); };
    });

    auto* eff = exp->add_subcommand("efficiency", "Efficiency of model II relative to model I");
    eff->add_option("--n", o.n)->capture_default_str();
    eff->add_option("--k", o.k_list, "Comma-separated list of k");
    add_format(eff, o);
    eff->callback([&] { action = [&] { return run_efficiency(o); }; });

    auto* haar = exp->add_subcommand("haar-moments", "Trace moments of Haar orthogonal matrices");
    haar->add_option("--n", o.n)->capture_default_str();
    add_mc(haar, o, 100000);
    add_format(haar, o);
    haar->callback([&] {
        default_if_unset(haar, "--reps", o.reps, std::size_t{100000});
        action = [&] { return run_haar_moments(o); };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        return action ? action() : kExitUsage;
    } catch (const degenerate_likelihood& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitDegenerate;
    } catch (const parse_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
