#pragma once

// Core value types shared by the simulators, estimators and pipelines.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>
#include "mfrac/error.hpp"

namespace mfrac {

using Json = nlohmann::ordered_json;

/// Observations on the uniform grid t = u / grid_n, u = 0..grid_n.
class SamplePath {
public:
    SamplePath() = default;

    explicit SamplePath(std::vector<double> values, Json meta = Json::object())
        : values_(std::move(values)), meta_(std::move(meta)) {
        if (values_.size() < 2)
            throw InvalidArgument("SamplePath: need at least two observations");
        for (double v : values_)
            if (!std::isfinite(v)) throw InvalidArgument("SamplePath: non-finite value");
    }

    std::span<const double> values() const noexcept { return values_; }
    std::vector<double>& mutable_values() noexcept { return values_; }
    int grid_n() const noexcept { return static_cast<int>(values_.size()) - 1; }
    std::size_t size() const noexcept { return values_.size(); }
    double time(std::size_t u) const noexcept { return static_cast<double>(u) / grid_n(); }
    double operator[](std::size_t u) const { return values_[u]; }

    const Json& meta() const noexcept { return meta_; }
    Json& meta() noexcept { return meta_; }

private:
    std::vector<double> values_;
    Json meta_ = Json::object();
};

/// Pointwise Hölder function H(t) on [0, 1].
class HolderFunction {
public:
    struct Constant { double h; };
    struct Sinusoid { double h0, amplitude, frequency; };
    struct Tabulated { std::vector<std::pair<double, double>> points; };

    static HolderFunction constant(double h) { return HolderFunction(Constant{h}); }
    static HolderFunction sinusoid(double h0, double amplitude, double frequency = 1.0) {
        return HolderFunction(Sinusoid{h0, amplitude, frequency});
    }
    /// Piecewise-linear through (t, H) pairs; held constant outside the table.
    static HolderFunction tabulated(std::vector<std::pair<double, double>> points) {
        return HolderFunction(Tabulated{std::move(points)});
    }

    double operator()(double t) const {
        return std::visit([t](const auto& k) { return eval(k, t); }, kind_);
    }

    bool is_constant() const noexcept { return std::holds_alternative<Constant>(kind_); }
    double inf() const noexcept { return lo_; }
    double sup() const noexcept { return hi_; }

    const auto& kind() const noexcept { return kind_; }

    Json to_json() const {
        return std::visit(
            [](const auto& k) -> Json {
                using K = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<K, Constant>) {
                    return {{"kind", "constant"}, {"h", k.h}};
                } else if constexpr (std::is_same_v<K, Sinusoid>) {
                    return {{"kind", "sinusoid"}, {"h0", k.h0}, {"amplitude", k.amplitude},
                            {"frequency", k.frequency}};
                } else {
                    Json pts = Json::array();
                    for (auto [t, h] : k.points) pts.push_back({t, h});
                    return {{"kind", "tabulated"}, {"points", pts}};
                }
            },
            kind_);
    }

    static HolderFunction from_json(const Json& j) {
        const std::string kind = j.at("kind").get<std::string>();
        if (kind == "constant") return constant(j.at("h").get<double>());
        if (kind == "sinusoid")
            return sinusoid(j.at("h0").get<double>(), j.at("amplitude").get<double>(),
                            j.value("frequency", 1.0));
        if (kind == "tabulated") {
            std::vector<std::pair<double, double>> pts;
            for (const auto& p : j.at("points")) pts.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
            return tabulated(std::move(pts));
        }
        throw InvalidArgument("HolderFunction: unknown kind '" + kind + "'");
    }

    /// Parses "constant:H", "sinusoid:h0,A[,f]" or "tabulated:t=h;t=h;...".
    static HolderFunction parse(std::string_view text) {
        const auto colon = text.find(':');
        if (colon == std::string_view::npos)
            throw InvalidArgument("holder spec must look like kind:params");
        const std::string kind(text.substr(0, colon));
        const std::string body(text.substr(colon + 1));
        auto numbers = [](const std::string& s, char sep) {
            std::vector<double> out;
            std::size_t pos = 0;
            while (pos <= s.size()) {
                const auto next = s.find(sep, pos);
                const std::string tok = s.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
                std::size_t used = 0;
                double v = 0.0;
                try {
                    v = std::stod(tok, &used);
                } catch (const std::exception&) {
                    throw InvalidArgument("holder spec: bad number '" + tok + "'");
                }
                if (used != tok.size()) throw InvalidArgument("holder spec: bad number '" + tok + "'");
                out.push_back(v);
                if (next == std::string::npos) break;
                pos = next + 1;
            }
            return out;
        };
        if (kind == "constant") {
            const auto v = numbers(body, ',');
            if (v.size() != 1) throw InvalidArgument("constant holder takes one value");
            return constant(v[0]);
        }
        if (kind == "sinusoid") {
            const auto v = numbers(body, ',');
            if (v.size() != 2 && v.size() != 3) throw InvalidArgument("sinusoid holder takes h0,A[,f]");
            return sinusoid(v[0], v[1], v.size() == 3 ? v[2] : 1.0);
        }
        if (kind == "tabulated") {
            std::vector<std::pair<double, double>> pts;
            std::size_t pos = 0;
            while (pos < body.size()) {
                const auto next = body.find(';', pos);
                const std::string item = body.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
                const auto v = numbers(item, '=');
                if (v.size() != 2) throw InvalidArgument("tabulated holder entries look like t=h");
                pts.emplace_back(v[0], v[1]);
                if (next == std::string::npos) break;
                pos = next + 1;
            }
            return tabulated(std::move(pts));
        }
        throw InvalidArgument("holder spec: unknown kind '" + kind + "'");
    }

private:
    using Kind = std::variant<Constant, Sinusoid, Tabulated>;

    explicit HolderFunction(Kind kind) : kind_(std::move(kind)) {
        if (auto* tab = std::get_if<Tabulated>(&kind_)) {
            if (tab->points.empty()) throw InvalidArgument("HolderFunction: empty table");
            for (std::size_t i = 1; i < tab->points.size(); ++i)
                if (!(tab->points[i].first > tab->points[i - 1].first))
                    throw InvalidArgument("HolderFunction: table abscissae must increase");
        }
        if (auto* c = std::get_if<Constant>(&kind_)) {
            lo_ = hi_ = c->h;
        } else {
            constexpr int kCheck = 10000;
            lo_ = hi_ = (*this)(0.0);
            for (int i = 1; i <= kCheck; ++i) {
                const double h = (*this)(static_cast<double>(i) / kCheck);
                lo_ = std::min(lo_, h);
                hi_ = std::max(hi_, h);
            }
        }
        if (!(lo_ > 0.0 && hi_ < 1.0))
            throw InvalidArgument("HolderFunction: values must lie strictly inside (0, 1)");
    }

    static double eval(const Constant& k, double) { return k.h; }
    static double eval(const Sinusoid& k, double t) {
        return k.h0 + k.amplitude * std::sin(2.0 * std::numbers::pi * k.frequency * t);
    }
    static double eval(const Tabulated& k, double t) {
        const auto& p = k.points;
        if (t <= p.front().first) return p.front().second;
        if (t >= p.back().first) return p.back().second;
        const auto it = std::upper_bound(p.begin(), p.end(), t,
                                         [](double x, const auto& e) { return x < e.first; });
        const auto& [t1, h1] = *it;
        const auto& [t0, h0] = *(it - 1);
        return h0 + (h1 - h0) * (t - t0) / (t1 - t0);
    }

    Kind kind_;
    double lo_ = 0.0;
    double hi_ = 0.0;
};

/// Transform catalog Z(t) = Phi(t, X(t)), plus the two forms driven by an
/// independent Brownian motion W.
class PhiForm {
public:
    enum class Tag { identity, square, exp, sin_t_times_x, sin2_plus_x2, w_times_x, w2_plus_x2 };

    explicit PhiForm(Tag tag, std::optional<std::uint64_t> aux_seed = std::nullopt)
        : tag_(tag), aux_seed_(aux_seed) {
        if (needs_aux(tag) && !aux_seed_)
            throw InvalidArgument("PhiForm: " + std::string(name(tag)) + " requires an aux seed");
        if (!needs_aux(tag) && aux_seed_)
            throw InvalidArgument("PhiForm: " + std::string(name(tag)) + " takes no aux seed");
    }

    Tag tag() const noexcept { return tag_; }
    std::optional<std::uint64_t> aux_seed() const noexcept { return aux_seed_; }

    static constexpr bool needs_aux(Tag t) noexcept {
        return t == Tag::w_times_x || t == Tag::w2_plus_x2;
    }

    static constexpr std::string_view name(Tag t) noexcept {
        switch (t) {
        case Tag::identity: return "identity";
        case Tag::square: return "square";
        case Tag::exp: return "exp";
        case Tag::sin_t_times_x: return "sin_t_times_x";
        case Tag::sin2_plus_x2: return "sin2_plus_x2";
        case Tag::w_times_x: return "w_times_x";
        case Tag::w2_plus_x2: return "w2_plus_x2";
        }
        return "?";
    }

    static Tag parse_tag(std::string_view s) {
        for (Tag t : all_tags())
            if (name(t) == s) return t;
        throw InvalidArgument("unknown phi form '" + std::string(s) + "'");
    }

    static constexpr std::array<Tag, 7> all_tags() noexcept {
        return {Tag::identity, Tag::square, Tag::exp, Tag::sin_t_times_x,
                Tag::sin2_plus_x2, Tag::w_times_x, Tag::w2_plus_x2};
    }

    std::string_view name() const noexcept { return name(tag_); }

private:
    Tag tag_;
    std::optional<std::uint64_t> aux_seed_;
};

} // namespace mfrac
