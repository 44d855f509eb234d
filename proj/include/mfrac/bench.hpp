#pragma once

// Monte Carlo RMSE study: simulate mBm scenarios, transform them, estimate
// the Hölder function with each method and summarize per-scenario RMSE.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mfrac/error.hpp"
#include "mfrac/estimate.hpp"
#include "mfrac/gaussian_sim.hpp"
#include "mfrac/io.hpp"
#include "mfrac/parallel.hpp"
#include "mfrac/rng.hpp"
#include "mfrac/sample_path.hpp"

namespace mfrac {

/// sqrt(mean (h_hat - H)^2) over the non-missing points.
inline double rmse(const EstimateSeries& est, const HolderFunction& truth) {
    double s = 0.0;
    std::size_t k = 0;
    for (std::size_t i = 0; i < est.size(); ++i) {
        if (est.missing(i)) continue;
        const double d = est.h_hat[i] - truth(est.t_grid[i]);
        s += d * d;
        ++k;
    }
    if (k == 0) throw InvalidArgument("rmse: every estimate is missing");
    return std::sqrt(s / static_cast<double>(k));
}

inline std::vector<EstimatorConfig> default_bench_methods() {
    std::vector<EstimatorConfig> m;
    EstimatorConfig gqv;
    gqv.method = Method::gqv;
    m.push_back(gqv);
    for (int q = 2; q <= 5; ++q) {
        EstimatorConfig c;
        c.method = Method::lgqv;
        c.increments = make_difference_sequence(q);
        m.push_back(c);
    }
    EstimatorConfig osc;
    osc.method = Method::oscillation;
    m.push_back(osc);
    return m;
}

struct BenchSpec {
    HolderFunction holder = HolderFunction::sinusoid(0.5, 0.3);
    std::vector<PhiForm::Tag> forms = [] {
        constexpr auto tags = PhiForm::all_tags();
        return std::vector<PhiForm::Tag>(tags.begin(), tags.end());
    }();
    std::vector<int> sizes{100, 200, 300, 400, 500, 600, 700, 800, 900, 1000};
    int scenarios = 100;
    std::vector<EstimatorConfig> methods = default_bench_methods();
    std::uint64_t master_seed = 0;
    SimulationOptions simulation{};
    bool traces = false; ///< keep mean h_hat per t at the largest size

    void validate() const {
        if (scenarios < 1) throw InvalidArgument("BenchSpec: scenarios must be >= 1");
        if (forms.empty() || sizes.empty() || methods.empty())
            throw InvalidArgument("BenchSpec: forms, sizes and methods must be non-empty");
        for (int n : sizes) {
            if (n < 32) throw InvalidArgument("BenchSpec: sizes must be >= 32");
            for (const auto& m : methods)
                if (m.method == Method::lgqv && n % 2 != 0)
                    throw InvalidArgument("BenchSpec: lgqv needs even sizes, got " + std::to_string(n));
        }
        for (const auto& m : methods) m.validate();
        std::vector<std::string> labels;
        for (const auto& m : methods) labels.push_back(m.label());
        std::sort(labels.begin(), labels.end());
        if (std::adjacent_find(labels.begin(), labels.end()) != labels.end())
            throw InvalidArgument("BenchSpec: duplicate method labels");
    }

    Json to_json() const {
        Json f = Json::array();
        for (auto t : forms) f.push_back(PhiForm::name(t));
        Json m = Json::array();
        for (const auto& c : methods) m.push_back(c.to_json());
        return {{"holder", holder.to_json()},
                {"forms", f},
                {"sizes", sizes},
                {"scenarios", scenarios},
                {"methods", m},
                {"master_seed", master_seed},
                {"hurst_step", simulation.hurst_step},
                {"embedding_oversample", simulation.embedding_oversample},
                {"traces", traces}};
    }
};

/// Seed of scenario s for (form, n); independent of which other cells run.
inline std::uint64_t scenario_seed(std::uint64_t master, PhiForm::Tag form, int n, int s) {
    return rng::split(master, {rng::label_key(PhiForm::name(form)), static_cast<std::uint64_t>(n),
                               static_cast<std::uint64_t>(s)});
}

struct RmseCell {
    std::string form;
    std::string method;
    int n = 0;
    double avg = std::numeric_limits<double>::quiet_NaN();
    double std = std::numeric_limits<double>::quiet_NaN();
    double max = std::numeric_limits<double>::quiet_NaN();
    double min = std::numeric_limits<double>::quiet_NaN();
    int scenarios_used = 0;
    int failures = 0;
    bool unreliable = false;
};

struct Trace {
    std::string form;
    std::string method;
    int n = 0;
    std::vector<double> t;
    std::vector<double> truth;
    std::vector<double> mean_h;
    std::vector<double> sd_h;
    std::vector<int> count;
};

struct RmseReport {
    std::vector<RmseCell> cells; ///< ordered by form, n, method
    std::vector<Trace> traces;
    Json provenance = Json::object();

    const RmseCell& cell(std::string_view form, std::string_view method, int n) const {
        for (const auto& c : cells)
            if (c.form == form && c.method == method && c.n == n) return c;
        throw InvalidArgument("RmseReport: no cell " + std::string(form) + "/" + std::string(method) + "/" +
                              std::to_string(n));
    }
};

namespace detail {

struct ScenarioResult {
    std::vector<std::optional<double>> rmse; // per method
    std::vector<EstimateSeries> series;      // per method, kept for traces only
};

inline void summarize(RmseCell& cell, const std::vector<std::optional<double>>& values) {
    std::vector<double> ok;
    for (const auto& v : values)
        if (v) ok.push_back(*v);
    cell.scenarios_used = static_cast<int>(ok.size());
    cell.failures = static_cast<int>(values.size() - ok.size());
    cell.unreliable = 10 * cell.failures > static_cast<int>(values.size());
    if (ok.empty()) return;
    double s = 0.0;
    for (double v : ok) s += v;
    cell.avg = s / static_cast<double>(ok.size());
    double ss = 0.0;
    for (double v : ok) ss += (v - cell.avg) * (v - cell.avg);
    cell.std = ok.size() > 1 ? std::sqrt(ss / static_cast<double>(ok.size() - 1)) : 0.0;
    cell.max = *std::max_element(ok.begin(), ok.end());
    cell.min = *std::min_element(ok.begin(), ok.end());
}

} // namespace detail

inline RmseReport run_benchmark(const BenchSpec& spec, unsigned threads = 1) {
    spec.validate();
    RmseReport report;
    const std::size_t nm = spec.methods.size();
    const int n_max = *std::max_element(spec.sizes.begin(), spec.sizes.end());
    std::map<int, MbmSampler> samplers;
    for (int n : spec.sizes)
        if (!samplers.count(n)) samplers.emplace(n, MbmSampler(spec.holder, n, spec.simulation));

    Json excluded = Json::array();
    for (auto form : spec.forms) {
        for (int n : spec.sizes) {
            const auto& sampler = samplers.at(n);
            const bool keep_series = spec.traces && n == n_max;
            std::vector<detail::ScenarioResult> results(static_cast<std::size_t>(spec.scenarios));
            parallel_for(results.size(), threads, [&](std::size_t s) {
                const std::uint64_t seed = scenario_seed(spec.master_seed, form, n, static_cast<int>(s));
                SamplePath x = sampler.sample(seed);
                std::optional<std::uint64_t> aux;
                if (PhiForm::needs_aux(form)) aux = rng::split(seed, "aux-bm");
                x = apply_phi(x, PhiForm(form, aux));
                auto& r = results[s];
                r.rmse.assign(nm, std::nullopt);
                if (keep_series) r.series.resize(nm);
                for (std::size_t m = 0; m < nm; ++m) {
                    try {
                        auto est = estimate(x, spec.methods[m]);
                        r.rmse[m] = rmse(est, spec.holder);
                        if (keep_series) r.series[m] = std::move(est);
                    } catch (const Error&) {
                        // counted as a failure for this cell
                    }
                }
            });

            for (std::size_t m = 0; m < nm; ++m) {
                RmseCell cell;
                cell.form = PhiForm::name(form);
                cell.method = spec.methods[m].label();
                cell.n = n;
                std::vector<std::optional<double>> values;
                for (const auto& r : results) values.push_back(r.rmse[m]);
                detail::summarize(cell, values);
                if (cell.failures > 0)
                    excluded.push_back({{"form", cell.form}, {"method", cell.method}, {"n", n},
                                        {"failures", cell.failures}});
                report.cells.push_back(cell);

                if (!keep_series) continue;
                Trace tr;
                tr.form = cell.form;
                tr.method = cell.method;
                tr.n = n;
                for (const auto& r : results) {
                    if (!r.rmse[m]) continue;
                    const auto& e = r.series[m];
                    if (tr.t.empty()) {
                        tr.t = e.t_grid;
                        tr.mean_h.assign(e.size(), 0.0);
                        tr.sd_h.assign(e.size(), 0.0);
                        tr.count.assign(e.size(), 0);
                    }
                    for (std::size_t i = 0; i < e.size(); ++i) {
                        if (e.missing(i)) continue;
                        tr.mean_h[i] += e.h_hat[i];
                        tr.sd_h[i] += e.h_hat[i] * e.h_hat[i];
                        ++tr.count[i];
                    }
                }
                for (std::size_t i = 0; i < tr.t.size(); ++i) {
                    tr.truth.push_back(spec.holder(tr.t[i]));
                    const double k = tr.count[i];
                    if (tr.count[i] == 0) {
                        tr.mean_h[i] = tr.sd_h[i] = std::numeric_limits<double>::quiet_NaN();
                        continue;
                    }
                    const double mean = tr.mean_h[i] / k;
                    const double var = tr.count[i] > 1 ? (tr.sd_h[i] - k * mean * mean) / (k - 1.0) : 0.0;
                    tr.mean_h[i] = mean;
                    tr.sd_h[i] = std::sqrt(std::max(0.0, var));
                }
                report.traces.push_back(std::move(tr));
            }
        }
    }
    const Json spec_json = spec.to_json();
    report.provenance = {{"master_seed", spec.master_seed},
                         {"seed_rule", "split(master_seed, [label_key(form), n, scenario])"},
                         {"config_digest", io::sha256_hex(spec_json.dump())},
                         {"spec", spec_json},
                         {"excluded", excluded}};
    return report;
}

inline std::string report_to_csv(const RmseReport& r) {
    using io::format_double;
    std::string s = "form,method,n,avg,std,max,min,scenarios,failures,unreliable\n";
    for (const auto& c : r.cells) {
        s += c.form + ',' + c.method + ',' + std::to_string(c.n) + ',' + format_double(c.avg) + ',' +
             format_double(c.std) + ',' + format_double(c.max) + ',' + format_double(c.min) + ',' +
             std::to_string(c.scenarios_used) + ',' + std::to_string(c.failures) + ',' +
             (c.unreliable ? "true" : "false") + '\n';
    }
    return s;
}

inline Json report_to_json(const RmseReport& r) {
    auto num = [](double v) { return std::isnan(v) ? Json(nullptr) : Json(v); };
    Json cells = Json::array();
    for (const auto& c : r.cells)
        cells.push_back({{"form", c.form},
                         {"method", c.method},
                         {"n", c.n},
                         {"avg", num(c.avg)},
                         {"std", num(c.std)},
                         {"max", num(c.max)},
                         {"min", num(c.min)},
                         {"scenarios", c.scenarios_used},
                         {"failures", c.failures},
                         {"unreliable", c.unreliable}});
    return {{"cells", cells}, {"provenance", r.provenance}};
}

inline std::string trace_to_csv(const Trace& tr) {
    using io::format_double;
    std::string s = "t,truth,mean_h_hat,sd_h_hat,count\n";
    for (std::size_t i = 0; i < tr.t.size(); ++i)
        s += format_double(tr.t[i]) + ',' + format_double(tr.truth[i]) + ',' + format_double(tr.mean_h[i]) +
             ',' + format_double(tr.sd_h[i]) + ',' + std::to_string(tr.count[i]) + '\n';
    return s;
}

} // namespace mfrac
