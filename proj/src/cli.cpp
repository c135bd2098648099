#include "ingarch/cli.hpp"

#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ingarch/coupling.hpp"
#include "ingarch/dist.hpp"
#include "ingarch/errors.hpp"
#include "ingarch/estimate.hpp"
#include "ingarch/io.hpp"
#include "ingarch/mc.hpp"
#include "ingarch/model.hpp"

namespace ingarch::cli {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed,
                         const std::string& path) {
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) ok = true;
        if (!ok) throw ConfigError("unknown config key '" + path + "/" + key + "'");
    }
}

const json* find(const json& obj, const char* key) {
    const auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

double get_number(const json& obj, const char* key, const std::string& path) {
    const json* v = find(obj, key);
    if (!v || !v->is_number())
        throw ConfigError("config field '" + path + "/" + key + "' must be a number");
    return v->get<double>();
}

std::vector<double> get_number_list(const json& obj, const char* key, const std::string& path,
                                    bool required) {
    const json* v = find(obj, key);
    if (!v) {
        if (required) throw ConfigError("config field '" + path + "/" + key + "' is required");
        return {};
    }
    if (!v->is_array()) throw ConfigError("config field '" + path + "/" + key + "' must be a list");
    std::vector<double> out;
    for (const auto& e : *v) {
        if (!e.is_number())
            throw ConfigError("config field '" + path + "/" + key + "' must hold numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

ConditionalFamily family_from_json(const json& obj, const std::string& path) {
    if (!obj.is_object()) throw ConfigError("config block '" + path + "' must be an object");
    reject_unknown_keys(obj, {"kind", "pi", "n", "r", "base"}, path);
    const json* kind = find(obj, "kind");
    if (!kind || !kind->is_string())
        throw ConfigError("config field '" + path + "/kind' must name a family");
    const std::string k = kind->get<std::string>();
    if (k == "skellam") return ConditionalFamily::skellam();
    if (k == "zero_inflated_skellam")
        return ConditionalFamily::zero_inflated_skellam(get_number(obj, "pi", path));
    if (k == "poisson_mapped") return ConditionalFamily::poisson_mapped();
    if (k == "binomial")
        return ConditionalFamily::binomial(static_cast<int>(get_number(obj, "n", path)));
    if (k == "sign_flipped") {
        const json* base = find(obj, "base");
        if (!base) throw ConfigError("config field '" + path + "/base' is required");
        return ConditionalFamily::sign_flipped(family_from_json(*base, path + "/base"),
                                               get_number(obj, "r", path));
    }
    throw ConfigError("config field '" + path + "/kind': unknown family '" + k + "'");
}

VolatilitySpec model_from_json(const json& obj, const std::string& path) {
    if (!obj.is_object()) throw ConfigError("config block '" + path + "' must be an object");
    reject_unknown_keys(obj, {"omega", "alpha", "beta"}, path);
    return VolatilitySpec::linear(get_number(obj, "omega", path),
                                  get_number_list(obj, "alpha", path, true),
                                  get_number_list(obj, "beta", path, false));
}

struct LoadedConfig {
    json root;
    std::string source_path;
};

/// Reads a config file; a manifest (output of an earlier run) is accepted
/// transparently by unwrapping its embedded config echo.
LoadedConfig load_config(const std::string& file) {
    std::ifstream is(file);
    if (!is) throw ConfigError("cannot open config file '" + file + "'");
    json root;
    try {
        root = json::parse(is);
    } catch (const json::parse_error& e) {
        throw ConfigError("config file '" + file + "': " + e.what());
    }
    if (!root.is_object()) throw ConfigError("config file '" + file + "' must hold a JSON object");
    if (root.contains("command") && root.contains("config")) {
        reject_unknown_keys(root, {"tool", "version", "command", "seed", "config"}, "");
        root = root["config"];
        if (!root.is_object())
            throw ConfigError("manifest '" + file + "' carries no config object");
    }
    reject_unknown_keys(root, {"model", "family", "seed", "simulate", "mixing", "study"}, "");
    return {std::move(root), file};
}

std::uint64_t seed_from_config(const json& root) {
    const json* s = find(root, "seed");
    if (!s) return 0;
    if (!s->is_number_unsigned() && !s->is_number_integer())
        throw ConfigError("config field '/seed' must be an integer");
    return s->get<std::uint64_t>();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open output file '" + path + "'");
    os << text;
    if (!os) throw IoError("failed writing output file '" + path + "'");
}

void write_manifest(const std::string& out_path, const std::string& command, const json& config) {
    json manifest;
    manifest["tool"] = "ingarch";
    manifest["version"] = kVersion;
    manifest["command"] = command;
    manifest["config"] = config;
    write_text_file(out_path + ".manifest.json", manifest.dump(2) + "\n");
}

int cmd_weights(const std::vector<double>& c, const std::vector<double>& d, std::ostream& out) {
    const CouplingWeights w = compute_weights(c, d);
    for (std::size_t i = 0; i < w.gamma.size(); ++i)
        out << "gamma_" << i + 1 << " = " << w.gamma[i] << '\n';
    for (std::size_t j = 0; j < w.delta.size(); ++j)
        out << "delta_" << j + 1 << " = " << w.delta[j] << '\n';
    out << "kappa = " << w.kappa << '\n';
    out << "epsilon = " << w.epsilon << '\n';
    return kOk;
}

int cmd_simulate(const std::string& config_file, const std::string& out_file,
                 std::optional<std::uint64_t> seed_flag, std::ostream& err) {
    const LoadedConfig cfg = load_config(config_file);
    const json* model = find(cfg.root, "model");
    const json* family = find(cfg.root, "family");
    if (!model || !family) throw ConfigError("simulate needs '/model' and '/family' blocks");
    const VolatilitySpec spec = model_from_json(*model, "model");
    const ConditionalFamily fam = family_from_json(*family, "family");

    SimulateOptions opt;
    opt.seed = seed_flag.value_or(seed_from_config(cfg.root));
    const json* sim = find(cfg.root, "simulate");
    if (!sim) throw ConfigError("simulate needs a '/simulate' block");
    reject_unknown_keys(*sim, {"n", "burn_in", "init"}, "simulate");
    opt.n = static_cast<std::int64_t>(get_number(*sim, "n", "simulate"));
    if (find(*sim, "burn_in"))
        opt.burn_in = static_cast<std::int64_t>(get_number(*sim, "burn_in", "simulate"));
    if (const json* init = find(*sim, "init")) {
        reject_unknown_keys(*init, {"x_lags", "v_lags"}, "simulate/init");
        ChainState st;
        for (double x : get_number_list(*init, "x_lags", "simulate/init", true))
            st.x_lags.push_back(static_cast<std::int64_t>(x));
        st.v_lags = get_number_list(*init, "v_lags", "simulate/init", false);
        opt.init = std::move(st);
    }

    if (!spec.contractive())
        err << "warning: spec is not contractive (L = " << spec.lipschitz_constants().total
            << "); simulation may explode\n";

    const std::vector<SeriesRecord> series = simulate(spec, fam, opt);
    std::ostringstream os;
    write_series_csv(os, series);
    write_text_file(out_file, os.str());

    json echo = cfg.root;
    echo["seed"] = opt.seed;
    write_manifest(out_file, "simulate", echo);
    return kOk;
}

int cmd_estimate(const std::string& input_file, int p, bool constrained, double omega_min,
                 const std::string& out_file) {
    std::ifstream is(input_file);
    if (!is) throw IoError("cannot open input file '" + input_file + "'");
    const std::vector<SeriesRecord> series = read_series_csv(is);
    std::vector<std::int64_t> xs;
    xs.reserve(series.size());
    for (const auto& r : series) xs.push_back(r.x);

    const RegressionData data = build_regression(xs, p);
    const FitResult fit = constrained ? constrained_olse(data, omega_min) : unconstrained_fit(data);
    if (fit.status == SolveStatus::Singular)
        throw SingularMatrixError("estimate: normal equations are singular (pivot ratio " +
                                  std::to_string(fit.pivot_ratio) + ")");
    std::ostringstream os;
    write_fit_csv(os, fit);
    write_text_file(out_file, os.str());

    json echo;
    echo["estimate"] = {{"input", input_file},
                        {"p", p},
                        {"constrained", constrained},
                        {"omega_min", omega_min}};
    write_manifest(out_file, "estimate", echo);
    return kOk;
}

int cmd_mixing(const std::string& config_file, std::optional<int> nmax_flag,
               std::optional<int> reps_flag, const std::string& out_file) {
    const LoadedConfig cfg = load_config(config_file);
    const json* model = find(cfg.root, "model");
    const json* family = find(cfg.root, "family");
    if (!model || !family) throw ConfigError("mixing needs '/model' and '/family' blocks");
    const VolatilitySpec spec = model_from_json(*model, "model");
    const ConditionalFamily fam = family_from_json(*family, "family");

    MixingOptions opt;
    opt.seed = seed_from_config(cfg.root);
    if (const json* mix = find(cfg.root, "mixing")) {
        reject_unknown_keys(*mix, {"n_max", "reps", "burn_in", "n_workers", "mode", "tv_lipschitz"},
                            "mixing");
        if (find(*mix, "n_max")) opt.n_max = static_cast<int>(get_number(*mix, "n_max", "mixing"));
        if (find(*mix, "reps")) opt.reps = static_cast<int>(get_number(*mix, "reps", "mixing"));
        if (find(*mix, "burn_in"))
            opt.burn_in = static_cast<std::int64_t>(get_number(*mix, "burn_in", "mixing"));
        if (find(*mix, "n_workers"))
            opt.n_workers = static_cast<int>(get_number(*mix, "n_workers", "mixing"));
        if (find(*mix, "tv_lipschitz")) opt.tv_lipschitz = get_number(*mix, "tv_lipschitz", "mixing");
        if (const json* mode = find(*mix, "mode")) {
            const std::string m = mode->is_string() ? mode->get<std::string>() : "";
            if (m == "symmetric") opt.mode = BetaBoundMode::Symmetric;
            else if (m == "nonnegative") opt.mode = BetaBoundMode::NonnegativeSupport;
            else if (m == "lipschitz") opt.mode = BetaBoundMode::Lipschitz;
            else throw ConfigError("config field 'mixing/mode' must be symmetric|nonnegative|lipschitz");
        }
    }
    if (nmax_flag) opt.n_max = *nmax_flag;
    if (reps_flag) opt.reps = *reps_flag;

    const MixingReport report = empirical_beta_estimate(spec, fam, opt);
    std::ostringstream os;
    write_mixing_csv(os, report);
    write_text_file(out_file, os.str());

    json echo = cfg.root;
    echo["seed"] = opt.seed;
    json mix;
    mix["n_max"] = opt.n_max;
    mix["reps"] = opt.reps;
    mix["burn_in"] = opt.burn_in;
    if (opt.n_workers > 0) mix["n_workers"] = opt.n_workers;
    if (opt.tv_lipschitz > 0) mix["tv_lipschitz"] = opt.tv_lipschitz;
    if (opt.mode) {
        mix["mode"] = *opt.mode == BetaBoundMode::Symmetric
                          ? "symmetric"
                          : (*opt.mode == BetaBoundMode::NonnegativeSupport ? "nonnegative"
                                                                            : "lipschitz");
    }
    echo["mixing"] = mix;
    write_manifest(out_file, "mixing", echo);
    return kOk;
}

int cmd_study(const std::string& config_file, const std::string& out_file) {
    const LoadedConfig cfg = load_config(config_file);
    const json* model = find(cfg.root, "model");
    const json* family = find(cfg.root, "family");
    const json* study = find(cfg.root, "study");
    if (!model || !family || !study)
        throw ConfigError("study needs '/model', '/family' and '/study' blocks");
    reject_unknown_keys(*study,
                        {"orders", "sample_sizes", "replications", "constrained", "omega_min",
                         "burn_in", "n_workers"},
                        "study");
    reject_unknown_keys(*model, {"omega", "alpha", "beta"}, "model");
    if (!get_number_list(*model, "beta", "model", false).empty())
        throw ConfigError("study fits ARCH models only; '/model/beta' must be absent or empty");

    StudyConfig sc;
    sc.omega = get_number(*model, "omega", "model");
    sc.alphas = get_number_list(*model, "alpha", "model", true);
    sc.family = family_from_json(*family, "family");
    sc.seed = seed_from_config(cfg.root);
    for (double p : get_number_list(*study, "orders", "study", true))
        sc.orders.push_back(static_cast<int>(p));
    for (double t : get_number_list(*study, "sample_sizes", "study", true))
        sc.sample_sizes.push_back(static_cast<std::int64_t>(t));
    if (find(*study, "replications"))
        sc.replications = static_cast<int>(get_number(*study, "replications", "study"));
    if (const json* c = find(*study, "constrained")) {
        if (!c->is_boolean()) throw ConfigError("config field 'study/constrained' must be boolean");
        sc.constrained = c->get<bool>();
    }
    if (find(*study, "omega_min")) sc.omega_min = get_number(*study, "omega_min", "study");
    if (find(*study, "burn_in"))
        sc.burn_in = static_cast<std::int64_t>(get_number(*study, "burn_in", "study"));
    if (find(*study, "n_workers"))
        sc.n_workers = static_cast<int>(get_number(*study, "n_workers", "study"));

    const StudyResult result = run_study(sc);
    std::ostringstream os;
    write_study_csv(os, result);
    write_text_file(out_file, os.str());

    json echo = cfg.root;
    echo["seed"] = sc.seed;
    write_manifest(out_file, "study", echo);
    return kOk;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"integer-valued GARCH simulation, coupling diagnostics and least-squares fitting"};
    app.name("ingarch");
    app.require_subcommand(1);

    std::string config_file, out_file, input_file;
    std::optional<std::uint64_t> seed_flag;
    std::optional<int> nmax_flag, reps_flag;
    int p = 1;
    bool constrained = false;
    double omega_min = 1e-8;
    std::vector<double> c_list, d_list;

    auto* sim = app.add_subcommand("simulate", "simulate a series, write t,x,v CSV");
    sim->add_option("--config", config_file, "config file (JSON; a manifest is accepted)")
        ->required();
    sim->add_option("--out", out_file, "output CSV path")->required();
    sim->add_option("--seed", seed_flag, "override the config seed");

    auto* est = app.add_subcommand("estimate", "least-squares fit of a series CSV");
    est->add_option("--input", input_file, "series CSV (t,x,v)")->required();
    est->add_option("--p", p, "ARCH order")->required();
    est->add_flag("--constrained", constrained, "enforce omega >= omega_min, alpha_i >= 0");
    est->add_option("--omega-min", omega_min, "lower bound for omega in the constrained fit");
    est->add_option("--out", out_file, "output CSV path")->required();

    auto* mix = app.add_subcommand("mixing", "coupling experiment and mixing bounds");
    mix->add_option("--config", config_file, "config file")->required();
    mix->add_option("--nmax", nmax_flag, "largest lag");
    mix->add_option("--reps", reps_flag, "replications");
    mix->add_option("--out", out_file, "output CSV path")->required();

    auto* stu = app.add_subcommand("study", "replication study over a (p, T) grid");
    stu->add_option("--config", config_file, "config file")->required();
    stu->add_option("--out", out_file, "output CSV path")->required();

    auto* wts = app.add_subcommand("weights", "print contraction weights for (c, d)");
    wts->add_option("--c", c_list, "squared-count Lipschitz constants")
        ->required()
        ->delimiter(',');
    wts->add_option("--d", d_list, "volatility Lipschitz constants")->delimiter(',');

    std::vector<std::string> argv_rev(args.rbegin(), args.rend());
    try {
        app.parse(argv_rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kBadConfig;
    }

    try {
        if (*wts) return cmd_weights(c_list, d_list, out);
        if (*sim) return cmd_simulate(config_file, out_file, seed_flag, err);
        if (*est) return cmd_estimate(input_file, p, constrained, omega_min, out_file);
        if (*mix) return cmd_mixing(config_file, nmax_flag, reps_flag, out_file);
        if (*stu) return cmd_study(config_file, out_file);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kBadConfig;
    } catch (const NotContractiveError& e) {
        err << "error: " << e.what() << '\n';
        return kBadConfig;
    } catch (const SingularMatrixError& e) {
        err << "error: " << e.what() << '\n';
        return kSingular;
    } catch (const FamilyDomainError& e) {
        err << "error: " << e.what() << '\n';
        return kDomainError;
    } catch (const ExplosionError& e) {
        err << "error: " << e.what() << '\n';
        return kDomainError;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kIoError;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kDomainError;
    }
    return kBadConfig;
}

} // namespace ingarch::cli
