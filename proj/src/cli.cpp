#include "tanhseed/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "tanhseed/csvio.hpp"
#include "tanhseed/data.hpp"
#include "tanhseed/fixedpoint.hpp"
#include "tanhseed/pinn.hpp"
#include "tanhseed/propagation.hpp"
#include "tanhseed/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace tanhseed {

namespace {

// rng stream ids within one run
constexpr std::uint64_t kStreamInputs = 10;
constexpr std::uint64_t kStreamWeights = 20;
constexpr std::uint64_t kStreamSubset = 40;

// fixed procedural corpus: the task is the same for every run, only
// subset/init/shuffle streams vary with the seed
constexpr std::size_t kSynthPool = 12000;
constexpr std::uint64_t kSynthSeed = 777;

struct IField {
    const char* key;
    const char* type;  // int | number | string | number_list | int_list
    bool required;
    json def;
    const char* doc;
};

struct ExperimentDef {
    const char* name;
    bool seeded;
    std::vector<IField> fields;
    std::vector<const char*> outputs;
};

const std::vector<ExperimentDef>& defs() {
    static const std::vector<ExperimentDef> d = {
        {"fixedpoint",
         false,
         {
             {"name", "string", false, "", "output directory name (defaults to experiment)"},
             {"a_min", "number", true, nullptr, "smallest gain in the scan, must be > 0"},
             {"a_max", "number", true, nullptr, "largest gain in the scan"},
             {"count", "int", true, nullptr, "number of evenly spaced grid points"},
             {"tol", "number", false, 1e-10, "absolute tolerance of each fixed point"},
         },
         {"scan.csv (a,xi)"}},
        {"propagate",
         true,
         {
             {"name", "string", false, "", "output directory name (defaults to experiment)"},
             {"width", "int", true, nullptr, "layer width"},
             {"depth", "int", true, nullptr, "number of weight applications"},
             {"scheme", "string", false, "mod_diag",
              "weight scheme: mod_diag | xavier_normal | xavier_uniform"},
             {"alpha", "number", false, 0.085, "noise scale for mod_diag"},
             {"batch", "int", false, 3000, "number of propagated input vectors"},
             {"input_low", "number", false, -1.0, "inputs drawn uniformly from [low, high)"},
             {"input_high", "number", false, 1.0, "inputs drawn uniformly from [low, high)"},
             {"sat_threshold", "number", false, 0.9,
              "|activation| above this counts as saturated"},
             {"seeds", "int_list", true, nullptr, "one run per seed"},
         },
         {"spread.csv (layer,spread)", "saturation.csv (layer,sat_frac)"}},
        {"sweep-alpha",
         true,
         {
             {"name", "string", false, "", "output directory name (defaults to experiment)"},
             {"width", "int", true, nullptr, "layer width"},
             {"depth", "int", true, nullptr, "number of weight applications"},
             {"alphas", "number_list", true, nullptr, "mod_diag noise scales to sweep"},
             {"batch", "int", false, 3000, "number of propagated input vectors"},
             {"input_low", "number", false, -1.0, "inputs drawn uniformly from [low, high)"},
             {"input_high", "number", false, 1.0, "inputs drawn uniformly from [low, high)"},
             {"sat_threshold", "number", false, 0.9,
              "|activation| above this counts as saturated"},
             {"seeds", "int_list", true, nullptr,
              "one run per seed; alphas share inputs and weight stream within a run"},
         },
         {"traces.csv (alpha,layer,spread)", "summary.csv (alpha,final_spread)"}},
        {"train",
         true,
         {
             {"name", "string", false, "", "output directory name (defaults to experiment)"},
             {"dataset", "string", true, nullptr, "synthetic | mnist | cifar10"},
             {"data_dir", "string", false, "",
              "directory with IDX / CIFAR files; falls back to $TANHSEED_DATA_DIR"},
             {"subset", "int", false, 0, "stratified subset size (0 keeps everything)"},
             {"width", "int", true, nullptr, "hidden layer width"},
             {"hidden", "int", true, nullptr, "number of hidden layers"},
             {"epochs", "int", false, 5, "training epochs"},
             {"batch_size", "int", false, 64, "minibatch size"},
             {"lr", "number", false, 1e-4, "Adam learning rate"},
             {"val_fraction", "number", false, 0.15, "stratified holdout fraction"},
             {"scheme", "string", false, "mod_diag",
              "weight scheme: mod_diag | xavier_normal | xavier_uniform"},
             {"alpha", "number", false, 0.085, "noise scale for mod_diag"},
             {"seeds", "int_list", true, nullptr, "one run per seed"},
         },
         {"metrics.csv (epoch,train_loss,val_loss,val_acc)"}},
        {"pinn",
         true,
         {
             {"name", "string", false, "", "output directory name (defaults to experiment)"},
             {"pde", "string", true, nullptr, "burgers | allen_cahn"},
             {"coeff", "number", false, 0.01, "viscosity (burgers) or interface width (allen_cahn)"},
             {"reaction", "string", false, "minus_linear",
              "allen_cahn reaction: minus_linear (u^3-u) | plus_linear (u^3+u)"},
             {"width", "int", true, nullptr, "hidden layer width"},
             {"hidden", "int", true, nullptr, "number of hidden layers"},
             {"n_interior", "int", false, 2000, "interior collocation points"},
             {"n_initial", "int", false, 200, "initial-condition points"},
             {"n_boundary", "int", false, 200, "boundary points"},
             {"adam_iters", "int", false, 300, "full-batch Adam iterations"},
             {"lbfgs_iters", "int", false, 300, "L-BFGS iterations after Adam"},
             {"lr", "number", false, 1e-3, "Adam learning rate"},
             {"scheme", "string", false, "mod_diag",
              "weight scheme: mod_diag | xavier_normal | xavier_uniform"},
             {"alpha", "number", false, 0.085, "noise scale for mod_diag"},
             {"grid_nx", "int", false, 101, "solution grid points in x"},
             {"grid_nt", "int", false, 101, "solution grid points in t"},
             {"seeds", "int_list", true, nullptr, "one run per seed"},
         },
         {"trace.csv (iter,phase,loss,residual,ic,bc)", "solution.csv (x,t,u)"}},
    };
    return d;
}

const ExperimentDef& find_def(const std::string& experiment) {
    for (const auto& d : defs())
        if (experiment == d.name) return d;
    throw ConfigError("unknown experiment '" + experiment + "'");
}

bool type_ok(const std::string& type, const json& v) {
    if (type == "int") return v.is_number_integer();
    if (type == "number") return v.is_number();
    if (type == "string") return v.is_string();
    if (type == "number_list") {
        if (!v.is_array()) return false;
        for (const auto& e : v)
            if (!e.is_number()) return false;
        return true;
    }
    if (type == "int_list") {
        if (!v.is_array()) return false;
        for (const auto& e : v)
            if (!e.is_number_integer() || e.get<std::int64_t>() < 0) return false;
        return true;
    }
    return false;
}

InitScheme parse_scheme(const std::string& s, double alpha) {
    if (s == "mod_diag") return InitScheme::mod_diag(alpha);
    if (s == "xavier_normal") return InitScheme::xavier_normal();
    if (s == "xavier_uniform") return InitScheme::xavier_uniform();
    throw ConfigError("unknown scheme '" + s + "'");
}

void require_cfg(bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
}

// Value-level constraints beyond shape; all violations are config errors.
void semantic_check(const std::string& exp, const json& p) {
    auto num = [&](const char* k) { return p.at(k).get<double>(); };
    auto integer = [&](const char* k) { return p.at(k).get<std::int64_t>(); };
    auto str = [&](const char* k) { return p.at(k).get<std::string>(); };

    if (exp == "fixedpoint") {
        require_cfg(num("a_min") > 0.0, "a_min must be > 0");
        require_cfg(num("a_max") >= num("a_min"), "a_max must be >= a_min");
        require_cfg(integer("count") >= 1, "count must be >= 1");
        require_cfg(num("tol") > 0.0, "tol must be > 0");
        return;
    }
    if (exp == "propagate" || exp == "sweep-alpha") {
        require_cfg(integer("width") >= 1, "width must be >= 1");
        require_cfg(integer("depth") >= 1, "depth must be >= 1");
        require_cfg(integer("batch") >= 1, "batch must be >= 1");
        require_cfg(num("input_low") < num("input_high"), "input_low must be < input_high");
        require_cfg(num("sat_threshold") > 0.0 && num("sat_threshold") < 1.0,
                    "sat_threshold must be in (0, 1)");
        if (exp == "propagate") {
            parse_scheme(str("scheme"), 0.085);
            require_cfg(num("alpha") >= 0.0, "alpha must be >= 0");
        } else {
            require_cfg(!p.at("alphas").empty(), "alphas must be non-empty");
            for (const auto& a : p.at("alphas"))
                require_cfg(a.get<double>() >= 0.0, "alphas must be >= 0");
        }
        return;
    }
    if (exp == "train") {
        std::string ds = str("dataset");
        require_cfg(ds == "synthetic" || ds == "mnist" || ds == "cifar10",
                    "dataset must be synthetic | mnist | cifar10");
        require_cfg(integer("subset") >= 0, "subset must be >= 0");
        require_cfg(integer("width") >= 1 && integer("hidden") >= 1,
                    "width and hidden must be >= 1");
        require_cfg(integer("epochs") >= 0, "epochs must be >= 0");
        require_cfg(integer("batch_size") >= 1, "batch_size must be >= 1");
        require_cfg(num("lr") > 0.0, "lr must be > 0");
        require_cfg(num("val_fraction") > 0.0 && num("val_fraction") < 1.0,
                    "val_fraction must be in (0, 1)");
        parse_scheme(str("scheme"), 0.085);
        require_cfg(num("alpha") >= 0.0, "alpha must be >= 0");
        return;
    }
    if (exp == "pinn") {
        std::string pde = str("pde");
        require_cfg(pde == "burgers" || pde == "allen_cahn", "pde must be burgers | allen_cahn");
        std::string reaction = str("reaction");
        require_cfg(reaction == "minus_linear" || reaction == "plus_linear",
                    "reaction must be minus_linear | plus_linear");
        require_cfg(num("coeff") > 0.0, "coeff must be > 0");
        require_cfg(integer("width") >= 1 && integer("hidden") >= 1,
                    "width and hidden must be >= 1");
        require_cfg(num("lr") > 0.0, "lr must be > 0");
        require_cfg(integer("grid_nx") >= 1 && integer("grid_nt") >= 1,
                    "grid_nx and grid_nt must be >= 1");
        parse_scheme(str("scheme"), 0.085);
        require_cfg(num("alpha") >= 0.0, "alpha must be >= 0");
        return;
    }
}

std::size_t line_of_byte(const std::string& text, std::size_t byte) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i)
        if (text[i] == '\n') ++line;
    return line;
}

json parse_config_text(const std::string& text, const std::string& path) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ":" + std::to_string(line_of_byte(text, e.byte)) +
                          ": " + e.what());
    }
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

struct RunOut {
    std::string run_id;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> files;
    json metrics;
};

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> xs(n);
    for (std::size_t i = 0; i < n; ++i)
        xs[i] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return xs;
}

// ---- per-experiment executors -------------------------------------------

RunOut run_fixedpoint(const json& p, const fs::path& dir) {
    RunOut out;
    double a_min = p.at("a_min"), a_max = p.at("a_max"), tol = p.at("tol");
    std::size_t count = p.at("count");
    CsvWriter csv((dir / "scan.csv").string(), "a,xi");
    double last = 0.0;
    for (double a : linspace(a_min, a_max, count)) {
        last = xi(a, tol);
        csv.row(a, last);
    }
    csv.close();
    out.files = {"scan.csv"};
    out.metrics = {{"count", count}, {"xi_at_a_max", last}};
    return out;
}

Mat draw_inputs(std::size_t width, std::size_t batch, double lo, double hi,
                std::uint64_t seed) {
    Mat inputs(width, batch);
    Rng rng(mix_seed(seed, kStreamInputs));
    for (std::size_t i = 0; i < inputs.size(); ++i) inputs.data()[i] = rng.uniform(lo, hi);
    return inputs;
}

RunOut run_propagate(const json& p, std::uint64_t seed, const fs::path& dir) {
    RunOut out;
    std::size_t width = p.at("width"), depth = p.at("depth"), batch = p.at("batch");
    InitScheme scheme = parse_scheme(p.at("scheme"), p.at("alpha"));
    NetworkArch arch(std::vector<std::size_t>(depth + 1, width));
    Mat inputs = draw_inputs(width, batch, p.at("input_low"), p.at("input_high"), seed);
    PropagateOptions opts;
    opts.sat_threshold = p.at("sat_threshold");
    SpreadTrace trace = propagate_stats(arch, scheme, inputs, mix_seed(seed, kStreamWeights), opts);

    CsvWriter spread_csv((dir / "spread.csv").string(), "layer,spread");
    CsvWriter sat_csv((dir / "saturation.csv").string(), "layer,sat_frac");
    for (std::size_t l = 0; l < trace.layers.size(); ++l) {
        spread_csv.row(l + 1, trace.layers[l].spread());
        sat_csv.row(l + 1, trace.layers[l].sat_frac);
    }
    spread_csv.close();
    sat_csv.close();

    std::size_t tail = std::max<std::size_t>(1, depth / 10);
    double tail_sat = 0.0;
    for (std::size_t l = depth - tail; l < depth; ++l) tail_sat += trace.layers[l].sat_frac;
    out.files = {"spread.csv", "saturation.csv"};
    out.metrics = {{"first_spread", trace.layers.front().spread()},
                   {"final_spread", trace.layers.back().spread()},
                   {"tail_sat_frac", tail_sat / static_cast<double>(tail)}};
    return out;
}

RunOut run_sweep_alpha(const json& p, std::uint64_t seed, const fs::path& dir) {
    RunOut out;
    std::size_t width = p.at("width"), depth = p.at("depth"), batch = p.at("batch");
    std::vector<double> alphas = p.at("alphas").get<std::vector<double>>();
    NetworkArch arch(std::vector<std::size_t>(depth + 1, width));
    Mat inputs = draw_inputs(width, batch, p.at("input_low"), p.at("input_high"), seed);
    PropagateOptions opts;
    opts.sat_threshold = p.at("sat_threshold");
    auto traces = alpha_sweep(arch, alphas, inputs, mix_seed(seed, kStreamWeights), opts);

    CsvWriter traces_csv((dir / "traces.csv").string(), "alpha,layer,spread");
    CsvWriter summary_csv((dir / "summary.csv").string(), "alpha,final_spread");
    json finals = json::array();
    for (std::size_t k = 0; k < alphas.size(); ++k) {
        for (std::size_t l = 0; l < traces[k].layers.size(); ++l)
            traces_csv.row(alphas[k], l + 1, traces[k].layers[l].spread());
        double f = traces[k].layers.back().spread();
        summary_csv.row(alphas[k], f);
        finals.push_back(f);
    }
    traces_csv.close();
    summary_csv.close();
    out.files = {"traces.csv", "summary.csv"};
    out.metrics = {{"alphas", alphas}, {"final_spreads", finals}};
    return out;
}

Dataset load_train_dataset(const json& p, std::uint64_t seed) {
    std::string kind = p.at("dataset");
    std::string dir = p.at("data_dir");
    if (dir.empty())
        if (const char* env = std::getenv("TANHSEED_DATA_DIR")) dir = env;

    Dataset ds;
    if (kind == "synthetic") {
        ds = make_synthetic_images(kSynthPool, kSynthSeed);
    } else if (kind == "mnist") {
        if (dir.empty())
            throw std::runtime_error(
                "mnist dataset needs data_dir or TANHSEED_DATA_DIR pointing at "
                "train-images-idx3-ubyte / train-labels-idx1-ubyte");
        ds = load_idx(dir + "/train-images-idx3-ubyte", dir + "/train-labels-idx1-ubyte");
    } else {
        if (dir.empty())
            throw std::runtime_error(
                "cifar10 dataset needs data_dir or TANHSEED_DATA_DIR pointing at "
                "data_batch_1.bin .. data_batch_5.bin");
        std::vector<std::string> files;
        for (int i = 1; i <= 5; ++i)
            files.push_back(dir + "/data_batch_" + std::to_string(i) + ".bin");
        ds = load_cifar10(files);
    }
    std::size_t subset = p.at("subset");
    if (subset > 0) ds = subset_stratified(ds, subset, mix_seed(seed, kStreamSubset));
    return ds;
}

RunOut run_train(const json& p, std::uint64_t seed, const fs::path& dir) {
    RunOut out;
    Dataset ds = load_train_dataset(p, seed);

    std::size_t width = p.at("width"), hidden = p.at("hidden");
    std::vector<std::size_t> dims;
    dims.push_back(ds.dim());
    dims.insert(dims.end(), hidden, width);
    dims.push_back(static_cast<std::size_t>(ds.num_classes));
    NetworkArch arch(dims);

    TrainConfig cfg;
    cfg.epochs = p.at("epochs");
    cfg.batch_size = p.at("batch_size");
    cfg.lr = p.at("lr");
    cfg.val_fraction = p.at("val_fraction");
    cfg.seed = seed;
    InitScheme scheme = parse_scheme(p.at("scheme"), p.at("alpha"));

    TrainResult result = train_classifier(arch, scheme, ds, cfg);

    CsvWriter csv((dir / "metrics.csv").string(), "epoch,train_loss,val_loss,val_acc");
    for (const auto& em : result.epochs)
        csv.row(em.epoch, em.train_loss, em.val_loss, em.val_acc);
    csv.close();
    out.files = {"metrics.csv"};
    out.metrics = {{"best_val_acc", result.best_val_acc},
                   {"best_epoch", result.best_epoch},
                   {"final_val_acc", result.epochs.empty() ? 0.0 : result.epochs.back().val_acc}};
    return out;
}

RunOut run_pinn(const json& p, std::uint64_t seed, const fs::path& dir) {
    RunOut out;
    std::string pde = p.at("pde");
    AcReaction reaction = p.at("reaction") == "plus_linear" ? AcReaction::PLUS_LINEAR
                                                           : AcReaction::MINUS_LINEAR;
    PdeProblem problem = pde == "burgers" ? PdeProblem::burgers(p.at("coeff"))
                                          : PdeProblem::allen_cahn(p.at("coeff"), reaction);

    std::size_t width = p.at("width"), hidden = p.at("hidden");
    std::vector<std::size_t> dims;
    dims.push_back(2);
    dims.insert(dims.end(), hidden, width);
    dims.push_back(1);
    NetworkArch arch(dims);

    PinnConfig cfg;
    cfg.n_interior = p.at("n_interior");
    cfg.n_initial = p.at("n_initial");
    cfg.n_boundary = p.at("n_boundary");
    cfg.adam_iters = p.at("adam_iters");
    cfg.lbfgs_iters = p.at("lbfgs_iters");
    cfg.adam_lr = p.at("lr");
    cfg.seed = seed;
    InitScheme scheme = parse_scheme(p.at("scheme"), p.at("alpha"));

    PinnResult result = train_pinn(arch, scheme, problem, cfg);

    CsvWriter trace_csv((dir / "trace.csv").string(), "iter,phase,loss,residual,ic,bc");
    for (const auto& row : result.trace)
        trace_csv.row(row.iter, row.phase, row.loss, row.residual, row.ic, row.bc);
    trace_csv.close();

    auto xs = linspace(-1.0, 1.0, p.at("grid_nx").get<std::size_t>());
    auto ts = linspace(0.0, 1.0, p.at("grid_nt").get<std::size_t>());
    Mat grid = evaluate_solution(arch, result.weights, xs, ts);
    CsvWriter sol_csv((dir / "solution.csv").string(), "x,t,u");
    for (std::size_t i = 0; i < xs.size(); ++i)
        for (std::size_t j = 0; j < ts.size(); ++j) sol_csv.row(xs[i], ts[j], grid(i, j));
    sol_csv.close();

    out.files = {"trace.csv", "solution.csv"};
    out.metrics = {{"final_loss", result.final_loss},
                   {"trace_rows", result.trace.size()}};
    return out;
}

RunOut execute_one(const std::string& experiment, const json& p, std::uint64_t seed,
                   const fs::path& dir) {
    fs::create_directories(dir);
    if (experiment == "fixedpoint") return run_fixedpoint(p, dir);
    if (experiment == "propagate") return run_propagate(p, seed, dir);
    if (experiment == "sweep-alpha") return run_sweep_alpha(p, seed, dir);
    if (experiment == "train") return run_train(p, seed, dir);
    if (experiment == "pinn") return run_pinn(p, seed, dir);
    throw ConfigError("unknown experiment '" + experiment + "'");
}

json summarize(const std::string& experiment, const std::vector<RunOut>& runs) {
    json s = json::object();
    auto collect = [&](const char* key) {
        std::vector<double> v;
        for (const auto& r : runs)
            if (r.metrics.contains(key)) v.push_back(r.metrics.at(key).get<double>());
        return v;
    };
    if (experiment == "train") {
        auto v = collect("best_val_acc");
        if (!v.empty()) s = {{"mean_best_val_acc", mean_of(v)}, {"median_best_val_acc", median_of(v)}};
    } else if (experiment == "pinn") {
        auto v = collect("final_loss");
        if (!v.empty()) s = {{"mean_final_loss", mean_of(v)}, {"median_final_loss", median_of(v)}};
    } else if (experiment == "propagate") {
        auto v = collect("final_spread");
        if (!v.empty()) s = {{"mean_final_spread", mean_of(v)}};
    } else if (experiment == "sweep-alpha" && !runs.empty()) {
        // mean final spread per alpha across seeds
        auto alphas = runs.front().metrics.at("alphas");
        std::vector<double> acc(alphas.size(), 0.0);
        for (const auto& r : runs) {
            const auto& f = r.metrics.at("final_spreads");
            for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += f.at(k).get<double>();
        }
        for (double& a : acc) a /= static_cast<double>(runs.size());
        s = {{"alphas", alphas}, {"mean_final_spreads", acc}};
    }
    return s;
}

}  // namespace

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> n;
        for (const auto& d : defs()) n.push_back(d.name);
        return n;
    }();
    return names;
}

const std::vector<FieldSpec>& experiment_schema(const std::string& experiment) {
    // the deque keeps the rendered default strings at stable addresses for
    // the const char* views handed out in FieldSpec
    static std::deque<std::string> text_pool;
    static std::map<std::string, std::vector<FieldSpec>> cache;
    auto it = cache.find(experiment);
    if (it == cache.end()) {
        const ExperimentDef& def = find_def(experiment);
        std::vector<FieldSpec> fields;
        for (const auto& f : def.fields) {
            text_pool.push_back(f.required ? std::string("") : f.def.dump());
            fields.push_back({f.key, f.type, f.required, text_pool.back().c_str(), f.doc});
        }
        it = cache.emplace(experiment, std::move(fields)).first;
    }
    return it->second;
}

ExperimentConfig load_config(const std::string& path, const std::string& expect_experiment) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    json doc = parse_config_text(ss.str(), path);
    if (!doc.is_object()) throw ConfigError(path + ": config must be a JSON object");
    if (!doc.contains("experiment") || !doc.at("experiment").is_string())
        throw ConfigError(path + ": missing string key 'experiment'");

    std::string experiment = doc.at("experiment");
    const ExperimentDef& def = find_def(experiment);
    if (!expect_experiment.empty() && experiment != expect_experiment)
        throw ConfigError(path + ": experiment is '" + experiment + "' but the subcommand is '" +
                          expect_experiment + "'");

    for (const auto& [key, value] : doc.items()) {
        if (key == "experiment") continue;
        const IField* spec = nullptr;
        for (const auto& f : def.fields)
            if (key == f.key) spec = &f;
        if (spec == nullptr)
            throw ConfigError(path + ": unknown key '" + key + "' for experiment '" +
                              experiment + "'");
        if (!type_ok(spec->type, value))
            throw ConfigError(path + ": key '" + key + "' must have type " + spec->type);
    }

    json params = json::object();
    for (const auto& f : def.fields) {
        if (doc.contains(f.key)) {
            params[f.key] = doc.at(f.key);
        } else if (f.required) {
            throw ConfigError(path + ": missing required key '" + f.key + "' for experiment '" +
                              experiment + "'");
        } else {
            params[f.key] = f.def;
        }
    }

    ExperimentConfig cfg;
    cfg.experiment = experiment;
    cfg.name = params.value("name", std::string{});
    if (cfg.name.empty()) cfg.name = experiment;
    if (def.seeded) {
        for (const auto& s : params.at("seeds"))
            cfg.seeds.push_back(s.get<std::uint64_t>());
        if (cfg.seeds.empty()) throw ConfigError(path + ": seeds must be non-empty");
    }

    semantic_check(experiment, params);

    // name and seeds identify the output location and the run list, not
    // the per-run computation, so they stay out of the hashed form
    params.erase("name");
    if (params.contains("seeds")) params.erase("seeds");
    json canonical = {{"experiment", experiment}, {"params", params}};
    cfg.canonical_params = canonical.dump();
    return cfg;
}

std::string run_experiment(const ExperimentConfig& cfg, const std::string& out_root,
                           unsigned jobs) {
    if (jobs == 0) throw ConfigError("jobs must be >= 1");
    json canonical = json::parse(cfg.canonical_params);
    const json& params = canonical.at("params");

    fs::path exp_dir = fs::path(out_root) / cfg.name;
    fs::create_directories(exp_dir);

    std::vector<std::optional<std::uint64_t>> run_seeds;
    if (cfg.seeds.empty())
        run_seeds.push_back(std::nullopt);
    else
        for (auto s : cfg.seeds) run_seeds.push_back(s);

    std::vector<RunOut> outs(run_seeds.size());
    std::vector<std::string> errors(run_seeds.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= run_seeds.size()) return;
            std::uint64_t seed = run_seeds[i].value_or(0);
            std::string run_id =
                hex64(fnv1a64(cfg.canonical_params + "#" + std::to_string(seed)));
            try {
                RunOut r = execute_one(cfg.experiment, params, seed, exp_dir / run_id);
                r.run_id = run_id;
                r.seed = run_seeds[i];
                outs[i] = std::move(r);
            } catch (const std::exception& e) {
                errors[i] = std::string(e.what());
            }
        }
    };
    unsigned nthreads = std::min<std::size_t>(jobs, run_seeds.size());
    if (nthreads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < nthreads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (const auto& err : errors)
        if (!err.empty()) throw std::runtime_error(err);

    json manifest;
    manifest["experiment"] = cfg.experiment;
    manifest["name"] = cfg.name;
    manifest["params"] = params;
    if (!cfg.seeds.empty()) manifest["seeds"] = cfg.seeds;
    manifest["runs"] = json::array();
    for (const auto& r : outs) {
        json run = {{"run_id", r.run_id}, {"dir", r.run_id}, {"files", r.files},
                    {"metrics", r.metrics}};
        if (r.seed) run["seed"] = *r.seed;
        manifest["runs"].push_back(run);
    }
    manifest["summary"] = summarize(cfg.experiment, outs);

    fs::path manifest_path = exp_dir / "manifest.json";
    std::ofstream mf(manifest_path);
    if (!mf) throw std::runtime_error("cannot open " + manifest_path.string());
    mf << manifest.dump(2) << '\n';
    mf.close();
    if (!mf) throw std::runtime_error("write failed: " + manifest_path.string());
    return manifest_path.string();
}

std::string describe_experiment(const std::string& experiment) {
    const ExperimentDef& def = find_def(experiment);
    json out;
    out["experiment"] = def.name;
    out["seeded"] = def.seeded;
    out["outputs"] = def.outputs;
    out["fields"] = json::array();
    for (const auto& f : def.fields) {
        json jf = {{"key", f.key}, {"type", f.type}, {"required", f.required}, {"doc", f.doc}};
        if (!f.required) jf["default"] = f.def;
        out["fields"].push_back(jf);
    }
    return out.dump(2);
}

bool seedcheck(const ExperimentConfig& cfg, const std::string& out_root) {
    // all runs of a config share their cost, so the first seed is the
    // cheapest declared run
    ExperimentConfig one = cfg;
    if (!one.seeds.empty()) one.seeds.resize(1);

    fs::path root(out_root);
    fs::path a = root / "seedcheck-a", b = root / "seedcheck-b";
    fs::remove_all(a);
    fs::remove_all(b);
    run_experiment(one, a.string(), 1);
    run_experiment(one, b.string(), 1);

    std::vector<fs::path> rel_a, rel_b;
    auto list_files = [](const fs::path& base, std::vector<fs::path>& out_list) {
        for (const auto& entry : fs::recursive_directory_iterator(base))
            if (entry.is_regular_file()) out_list.push_back(fs::relative(entry.path(), base));
        std::sort(out_list.begin(), out_list.end());
    };
    list_files(a, rel_a);
    list_files(b, rel_b);
    if (rel_a != rel_b) {
        std::cerr << "seedcheck: file lists differ between repeated runs\n";
        return false;
    }
    for (const auto& rel : rel_a) {
        std::ifstream fa(a / rel, std::ios::binary), fb(b / rel, std::ios::binary);
        std::stringstream sa, sb;
        sa << fa.rdbuf();
        sb << fb.rdbuf();
        if (sa.str() != sb.str()) {
            std::cerr << "seedcheck: " << rel.string() << " differs between repeated runs\n";
            return false;
        }
    }
    return true;
}

int cli_main(int argc, char** argv) {
    CLI::App app{"deep tanh network experiments driven by JSON configs"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_root = "out";
    std::string describe_name;
    unsigned jobs = 1;

    std::vector<CLI::App*> run_cmds;
    for (const auto& name : experiment_names()) {
        CLI::App* sc = app.add_subcommand(name, "run a '" + name + "' config");
        sc->add_option("--config", config_path, "JSON config file")->required();
        sc->add_option("--out", out_root, "output root directory")->capture_default_str();
        sc->add_option("--jobs", jobs, "concurrent runs")
            ->capture_default_str()
            ->check(CLI::PositiveNumber);
        run_cmds.push_back(sc);
    }
    CLI::App* describe_cmd =
        app.add_subcommand("describe", "print an experiment's parameter schema");
    describe_cmd->add_option("experiment", describe_name, "experiment kind (omit to list)");
    CLI::App* seedcheck_cmd = app.add_subcommand(
        "seedcheck", "run the config's first seed twice and byte-compare all outputs");
    seedcheck_cmd->add_option("--config", config_path, "JSON config file")->required();
    seedcheck_cmd->add_option("--out", out_root, "output root directory")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (describe_cmd->parsed()) {
            if (describe_name.empty()) {
                for (const auto& name : experiment_names()) std::cout << name << '\n';
            } else {
                std::cout << describe_experiment(describe_name) << '\n';
            }
            return 0;
        }
        if (seedcheck_cmd->parsed()) {
            ExperimentConfig cfg = load_config(config_path, "");
            if (seedcheck(cfg, out_root)) {
                std::cout << "seedcheck passed: repeated runs are byte-identical\n";
                return 0;
            }
            return 1;
        }
        for (std::size_t i = 0; i < run_cmds.size(); ++i) {
            if (!run_cmds[i]->parsed()) continue;
            ExperimentConfig cfg = load_config(config_path, experiment_names()[i]);
            std::string manifest = run_experiment(cfg, out_root, jobs);
            std::cout << "wrote " << manifest << '\n';
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

}  // namespace tanhseed
