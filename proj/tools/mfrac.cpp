// mfrac: simulate, estimate, bench, theory and analyze from the command line.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "mfrac/config.hpp"
#include "mfrac/mfrac.hpp"

namespace fs = std::filesystem;
using namespace mfrac;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

const auto kOpenUnit = CLI::Validator(
    [](const std::string& s) -> std::string {
        double v = 0.0;
        try {
            v = std::stod(s);
        } catch (const std::exception&) {
            return "not a number: " + s;
        }
        if (!(v > 0.0 && v < 1.0)) return "value must lie strictly between 0 and 1";
        return {};
    },
    "(0,1)");

std::string sanitize(std::string s) {
    for (char& c : s)
        if (c == '(' || c == ')') c = '-';
    while (!s.empty() && s.back() == '-') s.pop_back();
    return s;
}

fs::path sidecar(const fs::path& csv) {
    fs::path p = csv;
    p.replace_extension(".json");
    return p;
}

/// "a:b" integer range or "lo:hi:step" real grid.
std::vector<int> parse_int_range(const std::string& s) {
    const auto c = s.find(':');
    try {
        if (c == std::string::npos) return {std::stoi(s)};
        const int lo = std::stoi(s.substr(0, c)), hi = std::stoi(s.substr(c + 1));
        if (lo > hi) throw ConfigError("range '" + s + "' is empty");
        std::vector<int> out;
        for (int q = lo; q <= hi; ++q) out.push_back(q);
        return out;
    } catch (const std::logic_error&) {
        throw ConfigError("malformed range '" + s + "'");
    }
}

std::vector<double> parse_real_grid(const std::string& s) {
    std::vector<double> parts;
    std::size_t pos = 0;
    try {
        while (pos <= s.size()) {
            const auto c = s.find(':', pos);
            parts.push_back(std::stod(s.substr(pos, c == std::string::npos ? std::string::npos : c - pos)));
            if (c == std::string::npos) break;
            pos = c + 1;
        }
    } catch (const std::logic_error&) {
        throw ConfigError("malformed grid '" + s + "'");
    }
    if (parts.size() == 1) return parts;
    if (parts.size() != 3 || !(parts[2] > 0.0) || parts[0] > parts[1])
        throw ConfigError("grid must be lo:hi:step with step > 0");
    std::vector<double> out;
    const auto count = static_cast<long>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9)) + 1;
    for (long i = 0; i < count; ++i) out.push_back(std::round((parts[0] + i * parts[2]) * 1e12) / 1e12);
    return out;
}

Json read_config(const fs::path& p) {
    std::string text;
    try {
        text = io::read_file(p);
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    return config::parse_document(text, p.string());
}

void add_threads(CLI::App* cmd, unsigned& threads) {
    cmd->add_option("--threads", threads, "Worker threads (default: MFRAC_THREADS, else all cores)")
        ->check(CLI::PositiveNumber);
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
    std::string process = "mbm";
    std::optional<double> h;
    std::string holder;
    int n = 1000;
    std::uint64_t seed = 0;
    std::string phi = "identity";
    std::optional<std::uint64_t> aux_seed;
    bool exact = false;
    fs::path out;
    unsigned threads = 0;
};

int run_simulate(const SimulateArgs& a) {
    HolderFunction holder = HolderFunction::constant(0.5);
    if (a.process == "bm") {
        if (a.h || !a.holder.empty()) throw ConfigError("--process bm takes neither --h nor --holder");
    } else if (a.process == "fbm") {
        if (!a.h || !a.holder.empty()) throw ConfigError("--process fbm needs --h (and no --holder)");
        holder = HolderFunction::constant(*a.h);
    } else {
        if (a.h.has_value() == !a.holder.empty()) throw ConfigError("--process mbm needs exactly one of --h or --holder");
        try {
            holder = a.h ? HolderFunction::constant(*a.h) : HolderFunction::parse(a.holder);
        } catch (const InvalidArgument& e) {
            throw ConfigError(e.what());
        }
    }
    const auto tag = PhiForm::parse_tag(a.phi);
    std::optional<std::uint64_t> aux;
    if (PhiForm::needs_aux(tag)) aux = a.aux_seed.value_or(rng::split(a.seed, "aux-bm"));
    else if (a.aux_seed) throw ConfigError("--aux-seed only applies to w_times_x and w2_plus_x2");

    SimulationOptions opts;
    opts.threads = resolve_threads(a.threads);
    SamplePath x = a.exact ? simulate_mbm_exact(holder, a.n, a.seed, opts) : simulate_mbm(holder, a.n, a.seed, opts);
    if (tag != PhiForm::Tag::identity) x = apply_phi(x, PhiForm(tag, aux));
    x.meta()["process"] = a.process;
    x.meta()["method"] = a.exact ? "cholesky" : "circulant";
    io::write_file(a.out, io::path_to_csv(x));
    io::write_file(sidecar(a.out), io::dump_json(x.meta()));
    return 0;
}

// ---------------------------------------------------------------------------

struct EstimateArgs {
    fs::path in;
    std::string method = "lgqv";
    int q = 2;
    std::optional<double> gamma, alpha, beta;
    fs::path out;
    unsigned threads = 0;
};

int run_estimate(const EstimateArgs& a) {
    EstimatorConfig c;
    c.method = parse_method(a.method);
    if (c.method != Method::gqv && a.gamma) throw ConfigError("--gamma applies to gqv only");
    if (c.method != Method::oscillation && (a.alpha || a.beta)) throw ConfigError("--alpha/--beta apply to osc only");
    c.increments = make_difference_sequence(a.q);
    if (a.gamma) c.gqv_gamma = *a.gamma;
    if (a.alpha) c.osc_alpha = *a.alpha;
    if (a.beta) c.osc_beta = *a.beta;
    try {
        c.validate();
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
    const SamplePath x = io::read_path_csv(a.in);
    EstimateOptions eo;
    eo.threads = resolve_threads(a.threads);
    const auto est = estimate(x, c, std::nullopt, eo);
    for (const auto& w : est.warnings) std::cerr << "warning: " << w << '\n';
    io::write_file(a.out, io::estimate_to_csv(est));
    Json j = io::estimate_to_json(est);
    j["input"] = a.in.filename().string();
    io::write_file(sidecar(a.out), io::dump_json(j));
    return 0;
}

// ---------------------------------------------------------------------------

struct BenchArgs {
    fs::path config;
    fs::path out = "bench-out";
    unsigned threads = 0;
};

int run_bench(const BenchArgs& a) {
    const auto spec = config::bench_from_json(read_config(a.config));
    const auto report = run_benchmark(spec, resolve_threads(a.threads));
    io::Manifest m(a.out);
    m.write("rmse.csv", report_to_csv(report));
    m.write("rmse.json", io::dump_json(report_to_json(report)));
    for (const auto& tr : report.traces)
        m.write("traces/" + tr.form + "__" + sanitize(tr.method) + ".csv", trace_to_csv(tr));
    m.finish({{"command", "bench"}, {"config_digest", report.provenance["config_digest"]}});
    for (const auto& c : report.cells)
        if (c.unreliable) std::cerr << "warning: unreliable cell " << c.form << "/" << c.method << "/" << c.n << '\n';
    return 0;
}

// ---------------------------------------------------------------------------

struct TheoryArgs {
    std::string q_range = "1:5";
    std::string alpha_grid = "0.1:0.9:0.1";
    fs::path out = "theory-out";
};

int run_theory(const TheoryArgs& a) {
    const auto qs = parse_int_range(a.q_range);
    const auto alphas = parse_real_grid(a.alpha_grid);
    for (int q : qs)
        if (q < 1 || q > 12) throw ConfigError("--q-range values must lie in 1..12");
    for (double al : alphas)
        if (!(al > 0.0 && al < 1.0)) throw ConfigError("--alpha-grid values must lie in (0, 1)");
    std::string csv = "q,alpha,c_closed,c_integral,rel_diff\n";
    for (int q : qs) {
        const auto seq = make_difference_sequence(q);
        for (double al : alphas) {
            const double closed = theory::c_tilde_closed(seq, al);
            const double integral = theory::c_tilde_integral(seq, al);
            csv += std::to_string(q) + ',' + io::format_double(al) + ',' + io::format_double(closed) + ',' +
                   io::format_double(integral) + ',' + io::format_double(std::abs(integral / closed - 1.0)) + '\n';
        }
    }
    io::Manifest m(a.out);
    m.write("c_tilde.csv", csv);
    m.finish({{"command", "theory"}, {"q_range", a.q_range}, {"alpha_grid", a.alpha_grid}});
    return 0;
}

// ---------------------------------------------------------------------------

struct AnalyzeArgs {
    fs::path config;
    fs::path out = "analyze-out";
    bool log = false;
    unsigned threads = 0;
};

int run_analyze(const AnalyzeArgs& a) {
    auto cfg = config::analysis_from_json(read_config(a.config));
    if (a.log) cfg.spec.log_prices = true;
    io::Manifest m(a.out);
    fin::Universe data;
    if (cfg.manifest) {
        data = fin::load_manifest(a.config.parent_path() / *cfg.manifest);
    } else {
        data = fin::make_fixture(*cfg.fixture);
        Json index = Json::object();
        for (const auto& [ticker, markets] : data)
            for (const auto& [market, s] : markets) {
                const std::string file = ticker + "_" + market + ".csv";
                m.write("fixture/" + file, fin::price_csv(s));
                index[ticker][market] = file;
            }
        m.write("fixture/manifest.json", io::dump_json(index));
    }
    const auto res = fin::analyze(data, cfg.spec, resolve_threads(a.threads));
    m.write("table3.csv", fin::summary_csv(res));
    m.write("tests.json", io::dump_json(Json{{"tests", res.tests}}));
    m.finish({{"command", "analyze"}, {"log_prices", cfg.spec.log_prices}});
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multifractional process simulation and pointwise Hölder exponent estimation"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* s = app.add_subcommand("simulate", "Simulate a Brownian, fractional or multifractional path");
    s->set_help_flag("--help", "Print this help message and exit");
    s->add_option("--process", sim.process, "bm, fbm or mbm")
        ->check(CLI::IsMember({"bm", "fbm", "mbm"}))
        ->capture_default_str();
    s->add_option("--h", sim.h, "Constant Hurst exponent in (0,1)")->check(kOpenUnit);
    s->add_option("--holder", sim.holder, "Hölder function: constant:H | sinusoid:h0,A[,f] | tabulated:t=h;...");
    s->add_option("--n", sim.n, "Grid size N (path has N+1 points)")->check(CLI::Range(2, 1 << 24))->capture_default_str();
    s->add_option("--seed", sim.seed, "Random seed")->capture_default_str();
    std::vector<std::string> forms;
    for (auto t : PhiForm::all_tags()) forms.emplace_back(PhiForm::name(t));
    s->add_option("--phi", sim.phi, "Transform applied to the path")->check(CLI::IsMember(forms))->capture_default_str();
    s->add_option("--aux-seed", sim.aux_seed, "Seed of the independent Brownian motion for w_* forms");
    s->add_flag("--exact", sim.exact, "Exact covariance factorization (N <= 512) instead of circulant embedding");
    s->add_option("--out", sim.out, "Output CSV (metadata goes next to it as .json)")->required();
    add_threads(s, sim.threads);

    EstimateArgs est;
    auto* e = app.add_subcommand("estimate", "Estimate the pointwise Hölder exponent of a path CSV");
    e->add_option("--in", est.in, "Input CSV with header t,value")->required()->check(CLI::ExistingFile);
    e->add_option("--method", est.method, "lgqv, gqv or osc")
        ->check(CLI::IsMember({"lgqv", "gqv", "osc"}))
        ->capture_default_str();
    e->add_option("--q", est.q, "Vanishing moments of the difference filter")->check(CLI::Range(1, 12))->capture_default_str();
    e->add_option("--gamma", est.gamma, "GQV radius exponent (default 0.7)")->check(kOpenUnit);
    e->add_option("--alpha", est.alpha, "Oscillation lower window exponent (default 0.1)")->check(kOpenUnit);
    e->add_option("--beta", est.beta, "Oscillation upper window exponent (default 0.3)")->check(kOpenUnit);
    e->add_option("--out", est.out, "Output CSV (t,h_hat,n_points,flags); JSON goes next to it")->required();
    add_threads(e, est.threads);

    BenchArgs bench;
    auto* b = app.add_subcommand("bench", "Monte Carlo RMSE benchmark");
    b->add_option("--config", bench.config, "Benchmark JSON (docs/schema/bench.schema.json)")->required();
    b->add_option("--out", bench.out, "Output directory")->capture_default_str();
    add_threads(b, bench.threads);

    TheoryArgs th;
    auto* t = app.add_subcommand("theory", "Tabulate the increment variance constant");
    t->add_option("--q-range", th.q_range, "Vanishing moments, a:b")->capture_default_str();
    t->add_option("--alpha-grid", th.alpha_grid, "Exponents, lo:hi:step")->capture_default_str();
    t->add_option("--out", th.out, "Output directory")->capture_default_str();

    AnalyzeArgs an;
    auto* z = app.add_subcommand("analyze", "Per-period Hölder summaries of price series");
    z->add_option("--config", an.config, "Analysis JSON (docs/schema/analyze.schema.json)")->required();
    z->add_option("--out", an.out, "Output directory")->capture_default_str();
    z->add_flag("--log", an.log, "Estimate on log prices");
    add_threads(z, an.threads);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& ex) {
        return app.exit(ex);
    } catch (const CLI::CallForAllHelp& ex) {
        return app.exit(ex);
    } catch (const CLI::ParseError& ex) {
        app.exit(ex);
        return kExitUsage;
    }

    try {
        if (*s) return run_simulate(sim);
        if (*e) return run_estimate(est);
        if (*b) return run_bench(bench);
        if (*t) return run_theory(th);
        if (*z) return run_analyze(an);
    } catch (const ConfigError& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}
