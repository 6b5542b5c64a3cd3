#include "hiernet/cli.hpp"

#include "hiernet/datagen.hpp"
#include "hiernet/evaluation.hpp"
#include "hiernet/io.hpp"
#include "hiernet/objective.hpp"
#include "hiernet/prox.hpp"
#include "hiernet/solver.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace hiernet {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

std::string utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

Norm parse_norm(const std::string& s) {
    if (s == "l1") return Norm::L1;
    if (s == "linf") return Norm::Linf;
    throw CLI::ValidationError("--norm", "must be 'l1' or 'linf', got '" + s + "'");
}

Hierarchy parse_hierarchy(const std::string& s) {
    if (s == "weak") return Hierarchy::Weak;
    if (s == "strong") return Hierarchy::Strong;
    throw CLI::ValidationError("--hierarchy", "must be 'weak' or 'strong', got '" + s + "'");
}

std::vector<double> parse_grid(const std::string& s) {
    std::vector<double> grid;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
            grid.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw CLI::ValidationError("--lambda-grid", "cannot parse '" + item + "'");
        }
    }
    if (grid.empty()) {
        throw CLI::ValidationError("--lambda-grid", "no values given");
    }
    return grid;
}

json gen_config_json(const DataGenConfig& cfg) {
    return json{{"n_features", cfg.n_features},
                {"n_nonzero_main", cfg.n_nonzero_main},
                {"interaction_ratio", cfg.interaction_ratio},
                {"n_samples_per_split", cfg.n_samples_per_split},
                {"target_snr_db", cfg.target_snr_db},
                {"seed", cfg.seed},
                {"main_support",
                 cfg.main_support == MainSupport::Prefix ? "prefix" : "random"}};
}

json reg_config_json(const RegConfig& reg) {
    return json{{"lambda", reg.lambda},
                {"norm", reg.norm_r == Norm::L1 ? "l1" : "linf"},
                {"hierarchy", reg.hierarchy == Hierarchy::Weak ? "weak" : "strong"}};
}

json solver_config_json(const SolverConfig& cfg) {
    return json{{"tau", cfg.tau},
                {"sigma", cfg.sigma},
                {"beta", cfg.beta},
                {"op_norm", cfg.op_norm},
                {"max_iters", cfg.max_iters},
                {"tol_objective", cfg.tol_objective},
                {"tol_iterate", cfg.tol_iterate},
                {"seed", cfg.seed},
                {"trace_stride", cfg.trace_stride}};
}

void emit_manifest(const fs::path& path, std::uint64_t seed, const json& config,
                   const std::vector<fs::path>& inputs) {
    RunManifest manifest;
    manifest.library_version = kVersion;
    manifest.created_utc = utc_now();
    manifest.seed = seed;
    manifest.config_json = config.dump();
    for (const auto& input : inputs) {
        manifest.input_checksums[input.string()] = file_checksum_hex(input);
    }
    write_manifest(manifest, path);
}

struct GenerateArgs {
    std::string preset;
    int n_features = 0;
    int n_mains = -1;
    double rho = -1.0;
    int samples = 100;
    double snr_db = 5.0;
    std::string support = "prefix";
    std::uint64_t seed = 0;
    std::string out_dir;
};

int run_generate(const GenerateArgs& a) {
    DataGenConfig cfg;
    if (!a.preset.empty()) {
        if (a.preset == "dataset30") {
            cfg = preset_dataset30(a.seed);
        } else if (a.preset == "dataset100") {
            cfg = preset_dataset100(a.seed);
        } else {
            std::cerr << "error: --preset must be 'dataset30' or 'dataset100', got '"
                      << a.preset << "'\n";
            return 1;
        }
    } else {
        if (a.n_features <= 0 || a.n_mains < 0 || a.rho < 0.0) {
            std::cerr << "error: provide --preset or all of --n-features, --n-mains, --rho\n";
            return 1;
        }
        cfg.n_features = a.n_features;
        cfg.n_nonzero_main = a.n_mains;
        cfg.interaction_ratio = a.rho;
        cfg.seed = a.seed;
    }
    cfg.n_samples_per_split = a.samples;
    cfg.target_snr_db = a.snr_db;
    cfg.main_support = a.support == "random" ? MainSupport::Random : MainSupport::Prefix;

    const GroundTruth truth = generate_ground_truth(cfg);
    const GeneratedSplits splits = generate_dataset(truth, cfg);

    const fs::path dir(a.out_dir);
    fs::create_directories(dir);
    write_dataset(splits.train, dir / "train.csv");
    write_dataset(splits.validation, dir / "val.csv");
    write_dataset(splits.test, dir / "test.csv");
    ModelParams truth_params{truth.v_bar.cwiseMax(0.0), (-truth.v_bar).cwiseMax(0.0),
                             truth.theta_bar};
    write_model(truth_params, dir / "truth.json");

    json config = {{"command", "generate"}, {"datagen", gen_config_json(cfg)}};
    config["snr_defined"] = splits.snr_defined;
    config["empirical_snr_db"] = splits.empirical_snr_db;
    emit_manifest(dir / "manifest.json", cfg.seed, config, {});

    const Eigen::Index interactions =
        (truth.theta_bar.array() != 0.0).count() / 2;
    std::cout << "generated N=" << cfg.n_features << " with " << cfg.n_nonzero_main
              << " nonzero mains, " << interactions << " interactions, "
              << cfg.n_samples_per_split << " samples per split\n";
    if (splits.snr_defined) {
        std::cout << "empirical SNR (dB): train " << splits.empirical_snr_db[0] << ", val "
                  << splits.empirical_snr_db[1] << ", test " << splits.empirical_snr_db[2]
                  << "\n";
    } else {
        std::cout << "signal variance is zero; unit noise used (SNR undefined)\n";
    }
    std::cout << "wrote " << (dir / "train.csv").string() << ", val.csv, test.csv, "
              << "truth.json, manifest.json\n";
    return 0;
}

struct FitArgs {
    std::string data;
    double lambda = 0.0;
    std::string norm = "l1";
    std::string hierarchy = "strong";
    std::int64_t max_iters = 100000;
    double tol = 1e-8;
    double tol_iterate = -1.0;  // defaults to tol
    std::uint64_t seed = 0;
    std::int64_t trace_stride = 1;
    std::string out_prefix;
};

int run_fit(const FitArgs& a) {
    RegConfig reg{a.lambda, parse_norm(a.norm), parse_hierarchy(a.hierarchy)};
    const Dataset data = read_dataset(a.data);

    const SplittingSpec spec = reg.hierarchy == Hierarchy::Weak
                                   ? SplittingSpec::weak(reg.norm_r)
                                   : SplittingSpec::strong(reg.norm_r);
    const double beta = estimate_beta(data);
    const auto [tau, sigma] = default_steps(beta, spec);
    const double tol_iter = a.tol_iterate >= 0.0 ? a.tol_iterate : a.tol;
    SolverConfig cfg(tau, sigma, beta, spec.op_norm, a.max_iters, a.tol, tol_iter, a.seed,
                     a.trace_stride);

    const SolveReport report = reg.hierarchy == Hierarchy::Weak
                                   ? solve_weak(data, reg, cfg)
                                   : solve_strong(data, reg, cfg);

    const fs::path model_path = a.out_prefix + ".model.json";
    const fs::path trace_path = a.out_prefix + ".trace.csv";
    write_model(report.final_params, model_path);
    write_trace(report, trace_path);
    json config = {{"command", "fit"},
                   {"data", a.data},
                   {"reg", reg_config_json(reg)},
                   {"solver", solver_config_json(cfg)}};
    emit_manifest(a.out_prefix + ".manifest.json", a.seed, config, {fs::path(a.data)});

    std::cout << "fit finished after " << report.iterations << " iterations ("
              << (report.termination == Termination::Converged ? "converged" : "max iters")
              << "), objective " << report.trace.back().objective << ", train MSE "
              << mse(report.final_params, data) << "\n";
    std::cout << "wrote " << model_path.string() << ", " << trace_path.string() << "\n";
    return 0;
}

struct CvArgs {
    std::string preset;
    int n_features = 0;
    int n_mains = -1;
    double rho = -1.0;
    int samples = 100;
    double snr_db = 5.0;
    std::string train, val, test;
    std::string norm = "l1";
    std::string hierarchy = "strong";
    std::string grid;
    int seeds = 20;
    std::int64_t max_iters = 30000;
    double tol = 1e-7;
    int threads = 0;
    bool no_standardize = false;
    std::uint64_t seed = 0;
    std::string out;
};

int run_cv(const CvArgs& a) {
    RegConfig reg{0.0, parse_norm(a.norm), parse_hierarchy(a.hierarchy)};
    const std::vector<double> grid = parse_grid(a.grid);
    CvOptions opts;
    opts.max_iters = a.max_iters;
    opts.tol_objective = a.tol;
    opts.tol_iterate = a.tol;
    opts.standardize_responses = !a.no_standardize;
    opts.threads = a.threads;

    CvResult result;
    json config = {{"command", "cv"},
                   {"reg", reg_config_json(reg)},
                   {"lambda_grid", grid},
                   {"max_iters", a.max_iters},
                   {"tol", a.tol},
                   {"standardize", opts.standardize_responses}};
    std::vector<fs::path> inputs;

    const bool fixed_data = !a.train.empty() || !a.val.empty() || !a.test.empty();
    if (fixed_data) {
        if (a.train.empty() || a.val.empty() || a.test.empty()) {
            std::cerr << "error: fixed-data cv needs all of --train, --val, --test\n";
            return 1;
        }
        const Dataset train = read_dataset(a.train, SplitRole::Train);
        const Dataset val = read_dataset(a.val, SplitRole::Validation);
        const Dataset test = read_dataset(a.test, SplitRole::Test);
        result = cross_validate(train, val, test, reg, grid, opts);
        config["data"] = {{"train", a.train}, {"val", a.val}, {"test", a.test}};
        inputs = {a.train, a.val, a.test};
    } else {
        DataGenConfig gen;
        if (a.preset == "dataset30") {
            gen = preset_dataset30(a.seed);
        } else if (a.preset == "dataset100") {
            gen = preset_dataset100(a.seed);
        } else if (!a.preset.empty()) {
            std::cerr << "error: --preset must be 'dataset30' or 'dataset100', got '"
                      << a.preset << "'\n";
            return 1;
        } else {
            if (a.n_features <= 0 || a.n_mains < 0 || a.rho < 0.0) {
                std::cerr << "error: provide --preset, data files, or --n-features/"
                             "--n-mains/--rho\n";
                return 1;
            }
            gen.n_features = a.n_features;
            gen.n_nonzero_main = a.n_mains;
            gen.interaction_ratio = a.rho;
            gen.seed = a.seed;
        }
        gen.n_samples_per_split = a.samples;
        gen.target_snr_db = a.snr_db;
        result = cross_validate(gen, reg, grid, a.seeds, opts);
        config["datagen"] = gen_config_json(gen);
        config["n_seeds"] = a.seeds;
    }

    write_cv(result, a.out);
    emit_manifest(fs::path(a.out).string() + ".manifest.json", a.seed, config, inputs);

    for (const auto& warning : result.warnings) {
        std::cerr << "warning: " << warning << "\n";
    }
    std::cout << "lambda,val_mean,val_std,test_mean,test_std\n";
    for (const auto& rec : result.per_lambda) {
        std::cout << rec.lambda << ',' << rec.val_mean << ',' << rec.val_std << ','
                  << rec.test_mean << ',' << rec.test_std << "\n";
    }
    std::cout << "best lambda: " << result.best_lambda << "\n";
    std::cout << "wrote " << a.out << "\n";
    return 0;
}

struct ProjectArgs {
    std::string op;
    std::string in_file;
    std::string out_file;
    double gamma = 1.0;
    double omega_plus = 0.0;
    double omega_minus = 0.0;
};

int run_project(const ProjectArgs& a) {
    std::ifstream in(a.in_file);
    if (!in) {
        std::cerr << "error: cannot open " << a.in_file << "\n";
        return 1;
    }
    std::vector<double> values;
    double v;
    while (in >> v) values.push_back(v);
    if (values.empty()) {
        std::cerr << "error: no numbers in " << a.in_file << "\n";
        return 1;
    }
    Vector x = Eigen::Map<Vector>(values.data(), static_cast<Eigen::Index>(values.size()));

    std::vector<double> out_values;
    if (a.op == "orthant") {
        const Vector p = project_orthant(x);
        out_values.assign(p.data(), p.data() + p.size());
    } else if (a.op == "soft-threshold") {
        const Vector p = prox_l1(x, a.gamma);
        out_values.assign(p.data(), p.data() + p.size());
    } else if (a.op == "symmetric") {
        const auto n = static_cast<Eigen::Index>(std::llround(std::sqrt(
            static_cast<double>(values.size()))));
        if (n * n != static_cast<Eigen::Index>(values.size())) {
            std::cerr << "error: symmetric projection needs a square matrix, got "
                      << values.size() << " values\n";
            return 1;
        }
        Matrix m(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) m(i, j) = values[static_cast<std::size_t>(i * n + j)];
        }
        const Matrix p = project_symmetric(m);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) out_values.push_back(p(i, j));
        }
    } else if (a.op == "epi-linf" || a.op == "epi-l1" || a.op == "epi-l1-pos") {
        EpiPoint point{a.omega_plus, a.omega_minus, x};
        const EpiPoint p = a.op == "epi-linf"   ? project_epi_linf(point)
                           : a.op == "epi-l1"   ? project_epi_l1(point)
                                                : project_epi_l1_pos(point);
        out_values.push_back(p.omega_plus);
        out_values.push_back(p.omega_minus);
        out_values.insert(out_values.end(), p.u.data(), p.u.data() + p.u.size());
    } else {
        std::cerr << "error: --op must be one of orthant, symmetric, soft-threshold, "
                     "epi-linf, epi-l1, epi-l1-pos\n";
        return 1;
    }

    std::ostringstream body;
    body.precision(17);
    for (std::size_t i = 0; i < out_values.size(); ++i) {
        body << out_values[i] << (i + 1 < out_values.size() ? "\n" : "");
    }
    body << "\n";
    if (a.out_file.empty()) {
        std::cout << body.str();
    } else {
        std::ofstream out(a.out_file);
        out << body.str();
        if (!out) {
            std::cerr << "error: write failed: " << a.out_file << "\n";
            return 1;
        }
    }
    return 0;
}

struct BenchArgs {
    std::string sizes = "10,30,100";
    int samples = 100;
    std::int64_t iters = 200;
    std::string norm = "l1";
    std::string hierarchy = "strong";
    std::uint64_t seed = 0;
};

int run_bench(const BenchArgs& a) {
    RegConfig reg{4.0, parse_norm(a.norm), parse_hierarchy(a.hierarchy)};
    std::cout << "n,l,iterations,total_seconds,ms_per_iteration\n";
    for (double size : parse_grid(a.sizes)) {
        const int n = static_cast<int>(size);
        DataGenConfig gen;
        gen.n_features = n;
        gen.n_nonzero_main = std::max(1, n / 3);
        gen.interaction_ratio = std::min(1.0, 10.0 / std::max(1.0, n * (n - 1) / 2.0));
        gen.n_samples_per_split = a.samples;
        gen.seed = a.seed;
        const GroundTruth truth = generate_ground_truth(gen);
        const GeneratedSplits splits = generate_dataset(truth, gen);

        const SplittingSpec spec = reg.hierarchy == Hierarchy::Weak
                                       ? SplittingSpec::weak(reg.norm_r)
                                       : SplittingSpec::strong(reg.norm_r);
        const double beta = estimate_beta(splits.train);
        const auto [tau, sigma] = default_steps(beta, spec);
        SolverConfig cfg(tau, sigma, beta, spec.op_norm, a.iters, 0.0, 0.0, a.seed,
                         std::max<std::int64_t>(a.iters, 1));

        const auto t0 = std::chrono::steady_clock::now();
        const SolveReport report = reg.hierarchy == Hierarchy::Weak
                                       ? solve_weak(splits.train, reg, cfg)
                                       : solve_strong(splits.train, reg, cfg);
        const double seconds = std::chrono::duration<double>(
                                   std::chrono::steady_clock::now() - t0).count();
        std::cout << n << ',' << a.samples << ',' << report.iterations << ',' << seconds
                  << ',' << 1000.0 * seconds / static_cast<double>(report.iterations)
                  << "\n";
    }
    return 0;
}

}  // namespace

int cli_main(const std::vector<std::string>& args) {
    CLI::App app{"Sparse regression with pairwise interactions under weak/strong "
                 "hierarchy, solved by a primal-dual splitting with epigraphical "
                 "projections"};
    app.require_subcommand(1);

    GenerateArgs gen_args;
    auto* gen = app.add_subcommand("generate", "Generate a synthetic dataset");
    gen->add_option("--preset", gen_args.preset, "dataset30 or dataset100");
    gen->add_option("--n-features", gen_args.n_features, "Number of features N");
    gen->add_option("--n-mains", gen_args.n_mains, "Number of nonzero main effects");
    gen->add_option("--rho", gen_args.rho, "Interaction ratio in [0,1]");
    gen->add_option("--samples", gen_args.samples, "Samples per split");
    gen->add_option("--snr-db", gen_args.snr_db, "Target SNR in dB (inf = noiseless)");
    gen->add_option("--support", gen_args.support, "Main support: prefix or random")
        ->check(CLI::IsMember({"prefix", "random"}));
    gen->add_option("--seed", gen_args.seed, "RNG seed");
    gen->add_option("--out", gen_args.out_dir, "Output directory")->required();

    FitArgs fit_args;
    auto* fit = app.add_subcommand("fit", "Fit a model on a dataset CSV");
    fit->add_option("--data", fit_args.data, "Training CSV")->required();
    fit->add_option("--lambda", fit_args.lambda, "Regularization strength")
        ->required()
        ->check(CLI::NonNegativeNumber);
    fit->add_option("--norm", fit_args.norm, "Row norm: l1 or linf")
        ->check(CLI::IsMember({"l1", "linf"}));
    fit->add_option("--hierarchy", fit_args.hierarchy, "weak or strong")
        ->check(CLI::IsMember({"weak", "strong"}));
    fit->add_option("--max-iters", fit_args.max_iters, "Iteration cap");
    fit->add_option("--tol", fit_args.tol, "Relative objective-change tolerance");
    fit->add_option("--tol-iterate", fit_args.tol_iterate,
                    "Relative iterate-change tolerance (defaults to --tol)");
    fit->add_option("--seed", fit_args.seed, "Seed recorded in the manifest");
    fit->add_option("--trace-stride", fit_args.trace_stride, "Record every k-th iterate");
    fit->add_option("--out", fit_args.out_prefix, "Output prefix")->required();

    CvArgs cv_args;
    auto* cv = app.add_subcommand("cv", "Cross-validate a lambda grid");
    cv->add_option("--preset", cv_args.preset, "dataset30 or dataset100");
    cv->add_option("--n-features", cv_args.n_features, "Number of features N");
    cv->add_option("--n-mains", cv_args.n_mains, "Number of nonzero main effects");
    cv->add_option("--rho", cv_args.rho, "Interaction ratio in [0,1]");
    cv->add_option("--samples", cv_args.samples, "Samples per split");
    cv->add_option("--snr-db", cv_args.snr_db, "Target SNR in dB");
    cv->add_option("--train", cv_args.train, "Fixed train CSV");
    cv->add_option("--val", cv_args.val, "Fixed validation CSV");
    cv->add_option("--test", cv_args.test, "Fixed test CSV");
    cv->add_option("--norm", cv_args.norm, "Row norm: l1 or linf")
        ->check(CLI::IsMember({"l1", "linf"}));
    cv->add_option("--hierarchy", cv_args.hierarchy, "weak or strong")
        ->check(CLI::IsMember({"weak", "strong"}));
    cv->add_option("--lambda-grid", cv_args.grid, "Comma-separated lambda values")
        ->required();
    cv->add_option("--seeds", cv_args.seeds, "Number of seeds (generated data)");
    cv->add_option("--max-iters", cv_args.max_iters, "Iteration cap per fit");
    cv->add_option("--tol", cv_args.tol, "Stopping tolerance per fit");
    cv->add_option("--threads", cv_args.threads, "Worker threads (0 = HIERNET_THREADS)");
    cv->add_flag("--no-standardize", cv_args.no_standardize,
                 "Do not rescale responses by the train-split standard deviation");
    cv->add_option("--seed", cv_args.seed, "Base generation seed");
    cv->add_option("--out", cv_args.out, "Output CSV")->required();

    ProjectArgs proj_args;
    auto* proj = app.add_subcommand("project", "Apply a projection to a vector file");
    proj->add_option("--op", proj_args.op, "orthant, symmetric, soft-threshold, epi-linf, "
                                           "epi-l1, epi-l1-pos")
        ->required();
    proj->add_option("--in", proj_args.in_file, "Input file, whitespace-separated numbers")
        ->required();
    proj->add_option("--out", proj_args.out_file, "Output file (default stdout)");
    proj->add_option("--gamma", proj_args.gamma, "Threshold for soft-threshold");
    proj->add_option("--omega-plus", proj_args.omega_plus, "omega+ for epi ops");
    proj->add_option("--omega-minus", proj_args.omega_minus, "omega- for epi ops");

    BenchArgs bench_args;
    auto* bench = app.add_subcommand("bench", "Time the solver over problem sizes");
    bench->add_option("--sizes", bench_args.sizes, "Comma-separated feature counts");
    bench->add_option("--samples", bench_args.samples, "Samples per split");
    bench->add_option("--iters", bench_args.iters, "Iterations per size");
    bench->add_option("--norm", bench_args.norm, "l1 or linf")
        ->check(CLI::IsMember({"l1", "linf"}));
    bench->add_option("--hierarchy", bench_args.hierarchy, "weak or strong")
        ->check(CLI::IsMember({"weak", "strong"}));
    bench->add_option("--seed", bench_args.seed, "RNG seed");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return 1;
    }

    try {
        if (gen->parsed()) return run_generate(gen_args);
        if (fit->parsed()) return run_fit(fit_args);
        if (cv->parsed()) return run_cv(cv_args);
        if (proj->parsed()) return run_project(proj_args);
        if (bench->parsed()) return run_bench(bench_args);
    } catch (const DivergenceError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const StepSizeError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

int cli_main(int argc, char** argv) {
    std::vector<std::string> args;
    args.reserve(static_cast<std::size_t>(argc > 0 ? argc - 1 : 0));
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return cli_main(args);
}

}  // namespace hiernet
