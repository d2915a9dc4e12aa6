#pragma once

// Search spaces, uniform random search and synthetic objectives.
//
// Interval conventions: uniform_float and loguniform_float draw from [lo, hi);
// uniform_integer draws from [lo, hi] inclusive. Coordinate `name` of trial
// `index` comes from the stream keyed by (seed, name, index), so adding or
// changing one dimension never perturbs another's draws.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "showwork/error.hpp"
#include "showwork/rng.hpp"
#include "showwork/trial_data.hpp"

namespace showwork {

struct Choice {
    std::vector<Scalar> options;
    friend bool operator==(const Choice&, const Choice&) = default;
};
struct UniformInteger {
    std::int64_t lo, hi;
    friend bool operator==(const UniformInteger&, const UniformInteger&) = default;
};
struct UniformFloat {
    double lo, hi;
    friend bool operator==(const UniformFloat&, const UniformFloat&) = default;
};
struct LogUniformFloat {
    double lo, hi;
    friend bool operator==(const LogUniformFloat&, const LogUniformFloat&) = default;
};
struct Constant {
    Scalar value;
    friend bool operator==(const Constant&, const Constant&) = default;
};

using Domain = std::variant<Choice, UniformInteger, UniformFloat, LogUniformFloat, Constant>;

/// Throws DomainError naming `name` if the domain is empty or malformed.
inline void validate_domain(const std::string& name, const Domain& d) {
    auto fail = [&](const std::string& why) { throw DomainError("dimension '" + name + "': " + why); };
    if (const auto* c = std::get_if<Choice>(&d)) {
        if (c->options.empty()) fail("choice list must be non-empty");
    } else if (const auto* i = std::get_if<UniformInteger>(&d)) {
        if (!(i->lo < i->hi)) fail("uniform_integer needs lo < hi");
    } else if (const auto* f = std::get_if<UniformFloat>(&d)) {
        if (!std::isfinite(f->lo) || !std::isfinite(f->hi) || !(f->lo < f->hi)) fail("uniform_float needs finite lo < hi");
    } else if (const auto* l = std::get_if<LogUniformFloat>(&d)) {
        if (!std::isfinite(l->lo) || !std::isfinite(l->hi) || !(l->lo < l->hi)) fail("loguniform_float needs finite lo < hi");
        if (!(l->lo > 0.0)) fail("loguniform_float needs lo > 0");
    }
}

class SearchSpace {
public:
    using Dimension = std::pair<std::string, Domain>;

    SearchSpace() = default;

    SearchSpace& add(std::string name, Domain domain) {
        if (name.empty()) throw DomainError("dimension name must be non-empty");
        for (const auto& d : dims_)
            if (d.first == name) throw DomainError("dimension '" + name + "' declared twice");
        validate_domain(name, domain);
        dims_.emplace_back(std::move(name), std::move(domain));
        return *this;
    }

    const std::vector<Dimension>& dimensions() const noexcept { return dims_; }
    bool empty() const noexcept { return dims_.empty(); }

    const Domain* find(std::string_view name) const noexcept {
        for (const auto& d : dims_)
            if (d.first == name) return &d.second;
        return nullptr;
    }

    friend bool operator==(const SearchSpace&, const SearchSpace&) = default;

private:
    std::vector<Dimension> dims_;
};

/// Draws one coordinate from `domain` using `gen`.
inline Scalar draw(const Domain& domain, rng::SplitMix64& gen) {
    struct Visitor {
        rng::SplitMix64& gen;
        Scalar operator()(const Choice& c) const { return c.options[gen.below(c.options.size())]; }
        Scalar operator()(const UniformInteger& d) const {
            const auto span = static_cast<std::uint64_t>(d.hi) - static_cast<std::uint64_t>(d.lo) + 1;
            const auto offset = span == 0 ? gen() : gen.below(span);  // span == 0: the full int64 range
            return static_cast<std::int64_t>(static_cast<std::uint64_t>(d.lo) + offset);
        }
        Scalar operator()(const UniformFloat& d) const {
            double x = d.lo + (d.hi - d.lo) * gen.uniform01();
            if (x >= d.hi) x = std::nextafter(d.hi, d.lo);
            return std::max(x, d.lo);
        }
        Scalar operator()(const LogUniformFloat& d) const {
            const double a = std::log(d.lo), b = std::log(d.hi);
            double x = std::exp(a + (b - a) * gen.uniform01());
            if (x >= d.hi) x = std::nextafter(d.hi, d.lo);
            return std::max(x, d.lo);
        }
        Scalar operator()(const Constant& c) const { return c.value; }
    };
    return std::visit(Visitor{gen}, domain);
}

/// Hyperparameter value number `index` of the search with `seed`.
inline HyperparameterValue sample_at(const SearchSpace& space, std::uint64_t seed, std::uint64_t index) {
    HyperparameterValue h;
    for (const auto& [name, domain] : space.dimensions()) {
        auto gen = rng::substream(seed, name, index);
        h.set(name, draw(domain, gen));
    }
    return h;
}

/// `count` i.i.d. uniform draws from `space`.
inline std::vector<HyperparameterValue> sample(const SearchSpace& space, std::uint64_t seed, std::int64_t count) {
    if (count < 1) throw DomainError("sample count must be >= 1");
    for (const auto& [name, domain] : space.dimensions()) validate_domain(name, domain);
    std::vector<HyperparameterValue> out;
    out.reserve(static_cast<std::size_t>(count));
    for (std::int64_t i = 0; i < count; ++i) out.push_back(sample_at(space, seed, static_cast<std::uint64_t>(i)));
    return out;
}

/// True when `value` lies in `domain` under the interval conventions above.
inline bool contains(const Domain& domain, const Scalar& value) {
    if (const auto* c = std::get_if<Choice>(&domain))
        return std::find(c->options.begin(), c->options.end(), value) != c->options.end();
    if (const auto* k = std::get_if<Constant>(&domain)) return k->value == value;
    if (const auto* i = std::get_if<UniformInteger>(&domain)) {
        const auto* v = std::get_if<std::int64_t>(&value);
        return v && *v >= i->lo && *v <= i->hi;
    }
    const auto* v = std::get_if<double>(&value);
    if (!v) return false;
    if (const auto* f = std::get_if<UniformFloat>(&domain)) return *v >= f->lo && *v < f->hi;
    const auto& l = std::get<LogUniformFloat>(domain);
    return *v >= l.lo && *v < l.hi;
}

/// Position of `value` inside `domain`, mapped to [0, 1]. Log scale for
/// loguniform dimensions, option index for choices.
inline double normalized_coordinate(const Domain& domain, const Scalar& value) {
    auto num = [](const Scalar& s) {
        if (const auto* i = std::get_if<std::int64_t>(&s)) return static_cast<double>(*i);
        if (const auto* d = std::get_if<double>(&s)) return *d;
        throw DomainError("expected a numeric hyperparameter");
    };
    if (const auto* c = std::get_if<Choice>(&domain)) {
        auto it = std::find(c->options.begin(), c->options.end(), value);
        if (it == c->options.end()) throw DomainError("value is not one of the choices");
        return c->options.size() == 1 ? 0.0
                                      : static_cast<double>(it - c->options.begin()) /
                                            static_cast<double>(c->options.size() - 1);
    }
    if (std::holds_alternative<Constant>(domain)) return 0.0;
    if (const auto* i = std::get_if<UniformInteger>(&domain))
        return (num(value) - static_cast<double>(i->lo)) / (static_cast<double>(i->hi) - static_cast<double>(i->lo));
    if (const auto* f = std::get_if<UniformFloat>(&domain)) return (num(value) - f->lo) / (f->hi - f->lo);
    const auto& l = std::get<LogUniformFloat>(domain);
    return (std::log(num(value)) - std::log(l.lo)) / (std::log(l.hi) - std::log(l.lo));
}

// --- search-space files -----------------------------------------------------

inline Json domain_to_json(const Domain& d) {
    struct Visitor {
        Json operator()(const Choice& c) const {
            Json arr = Json::array();
            for (const auto& o : c.options) arr.push_back(scalar_to_json(o));
            return {{"choice", std::move(arr)}};
        }
        Json operator()(const UniformInteger& d) const { return {{"uniform_integer", {d.lo, d.hi}}}; }
        Json operator()(const UniformFloat& d) const { return {{"uniform_float", {d.lo, d.hi}}}; }
        Json operator()(const LogUniformFloat& d) const { return {{"loguniform_float", {d.lo, d.hi}}}; }
        Json operator()(const Constant& c) const { return {{"constant", scalar_to_json(c.value)}}; }
    };
    return std::visit(Visitor{}, d);
}

inline Json space_to_json(const SearchSpace& space) {
    Json dims = Json::object();
    for (const auto& [name, domain] : space.dimensions()) dims[name] = domain_to_json(domain);
    return {{"dimensions", std::move(dims)}};
}

/// Parses {"dimensions": {name: {kind: args}}}. Kind spellings accept
/// either '_' or '-' ("loguniform-float").
/// Throws ParseError naming the offending dimension.
inline SearchSpace space_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("dimensions") || !j["dimensions"].is_object())
        throw ParseError("search space: expected an object with a 'dimensions' object");
    for (const auto& [key, _] : j.items())
        if (key != "dimensions") throw ParseError("search space: unknown field '" + key + "'");
    SearchSpace space;
    for (const auto& [name, spec] : j["dimensions"].items()) {
        auto fail = [&](const std::string& why) -> void {
            throw ParseError("search space dimension '" + name + "': " + why);
        };
        if (!spec.is_object() || spec.size() != 1) fail("expected an object with exactly one domain kind");
        std::string kind = spec.begin().key();
        std::replace(kind.begin(), kind.end(), '-', '_');
        const Json& args = spec.begin().value();
        auto pair_of = [&]() -> std::pair<const Json&, const Json&> {
            if (!args.is_array() || args.size() != 2 || !args[0].is_number() || !args[1].is_number())
                fail(kind + " expects [lo, hi]");
            return {args[0], args[1]};
        };
        Domain domain;
        if (kind == "choice") {
            if (!args.is_array()) fail("choice expects a list");
            Choice c;
            for (const auto& o : args) {
                auto s = scalar_from_json(o);
                if (!s) fail("choice options must be scalars");
                c.options.push_back(*s);
            }
            domain = std::move(c);
        } else if (kind == "uniform_integer") {
            auto [lo, hi] = pair_of();
            if (!lo.is_number_integer() || !hi.is_number_integer()) fail("uniform_integer bounds must be integers");
            domain = UniformInteger{lo.get<std::int64_t>(), hi.get<std::int64_t>()};
        } else if (kind == "uniform_float") {
            auto [lo, hi] = pair_of();
            domain = UniformFloat{lo.get<double>(), hi.get<double>()};
        } else if (kind == "loguniform_float") {
            auto [lo, hi] = pair_of();
            domain = LogUniformFloat{lo.get<double>(), hi.get<double>()};
        } else if (kind == "constant") {
            auto s = scalar_from_json(args);
            if (!s) fail("constant must be a scalar");
            domain = Constant{*s};
        } else {
            fail("unknown domain kind '" + spec.begin().key() + "'");
        }
        try {
            space.add(name, std::move(domain));
        } catch (const DomainError& e) {
            throw ParseError(std::string("search space: ") + e.what());
        }
    }
    return space;
}

/// Table rendering of a domain, e.g. "loguniform-float[1e-06, 0.1]".
inline std::string describe_domain(const Domain& d) {
    struct Visitor {
        std::string operator()(const Choice& c) const {
            std::string s = "choice[";
            for (std::size_t i = 0; i < c.options.size(); ++i) s += (i ? ", " : "") + scalar_to_string(c.options[i]);
            return s + "]";
        }
        std::string operator()(const UniformInteger& d) const {
            return "uniform-integer[" + std::to_string(d.lo) + ", " + std::to_string(d.hi) + "]";
        }
        std::string operator()(const UniformFloat& d) const {
            return "uniform-float[" + format_shortest(d.lo) + ", " + format_shortest(d.hi) + "]";
        }
        std::string operator()(const LogUniformFloat& d) const {
            return "loguniform-float[" + format_shortest(d.lo) + ", " + format_shortest(d.hi) + "]";
        }
        std::string operator()(const Constant& c) const { return scalar_to_string(c.value); }
    };
    return std::visit(Visitor{}, d);
}

// --- synthetic objectives ---------------------------------------------------

/// Always returns `value`.
struct ConstantObjective {
    double value;
};

/// Looks up the performance of h[dimension] (rendered as text) in a table.
struct TableObjective {
    std::string dimension;
    std::vector<std::pair<std::string, double>> table;
};

/// peak - sum_d weight_d * (x_d - optimum_d)^2 + noise_std * z, where x_d is
/// the normalized coordinate of dimension d and z a standard normal keyed by
/// (noise seed, h). The result is clamped to [floor, ceiling].
struct ResponseSurfaceObjective {
    struct Term {
        std::string dimension;
        double optimum;
        double weight;
    };
    double peak = 1.0;
    std::vector<Term> terms;
    double noise_std = 0.0;
    double floor = -std::numeric_limits<double>::infinity();
    double ceiling = std::numeric_limits<double>::infinity();
};

using SyntheticObjective = std::variant<ConstantObjective, TableObjective, ResponseSurfaceObjective>;

/// Performance of `h`; a pure function of (h, noise_seed).
inline double evaluate(const SyntheticObjective& objective, const HyperparameterValue& h, const SearchSpace& space,
                       std::uint64_t noise_seed) {
    if (const auto* c = std::get_if<ConstantObjective>(&objective)) return c->value;
    if (const auto* t = std::get_if<TableObjective>(&objective)) {
        const auto* v = h.find(t->dimension);
        if (!v) throw DomainError("table objective: hyperparameter '" + t->dimension + "' is not set");
        const auto key = scalar_to_string(*v);
        for (const auto& [k, perf] : t->table)
            if (k == key) return perf;
        throw DomainError("table objective: no entry for " + t->dimension + "=" + key);
    }
    const auto& r = std::get<ResponseSurfaceObjective>(objective);
    double perf = r.peak;
    for (const auto& term : r.terms) {
        const auto* v = h.find(term.dimension);
        const auto* domain = space.find(term.dimension);
        if (!v || !domain) throw DomainError("response surface: unknown dimension '" + term.dimension + "'");
        const double x = normalized_coordinate(*domain, *v);
        perf -= term.weight * (x - term.optimum) * (x - term.optimum);
    }
    if (r.noise_std > 0.0) {
        Json key = Json::object();
        for (const auto& [name, value] : h.entries()) key[name] = scalar_to_json(value);
        auto gen = rng::substream(noise_seed, key.dump(), 0);
        perf += r.noise_std * gen.normal();
    }
    return std::clamp(perf, r.floor, r.ceiling);
}

/// Parses {"kind": "constant", "value": v}
///      | {"kind": "table", "dimension": d, "table": {text: v, ...}}
///      | {"kind": "response_surface", "peak": v, "terms": [{"dimension", "optimum", "weight"}],
///         "noise_std": v, "floor": v, "ceiling": v}
inline SyntheticObjective objective_from_json(const Json& j) {
    auto fail = [](const std::string& why) -> void { throw ParseError("objective: " + why); };
    if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) fail("expected an object with a 'kind'");
    auto number = [&](const char* field, std::optional<double> fallback = std::nullopt) {
        if (!j.contains(field)) {
            if (!fallback) fail(std::string("missing field '") + field + "'");
            return *fallback;
        }
        if (!j[field].is_number()) fail(std::string("field '") + field + "' must be a number");
        return j[field].get<double>();
    };
    const auto kind = j["kind"].get<std::string>();
    if (kind == "constant") return ConstantObjective{number("value")};
    if (kind == "table") {
        TableObjective t;
        if (!j.contains("dimension") || !j["dimension"].is_string()) fail("table needs a 'dimension' string");
        t.dimension = j["dimension"].get<std::string>();
        if (!j.contains("table") || !j["table"].is_object()) fail("table needs a 'table' object");
        for (const auto& [k, v] : j["table"].items()) {
            if (!v.is_number()) fail("table entry '" + k + "' must be a number");
            t.table.emplace_back(k, v.get<double>());
        }
        return t;
    }
    if (kind == "response_surface") {
        ResponseSurfaceObjective r;
        r.peak = number("peak");
        r.noise_std = number("noise_std", 0.0);
        r.floor = number("floor", -std::numeric_limits<double>::infinity());
        r.ceiling = number("ceiling", std::numeric_limits<double>::infinity());
        if (j.contains("terms")) {
            if (!j["terms"].is_array()) fail("'terms' must be a list");
            for (const auto& t : j["terms"]) {
                if (!t.is_object() || !t.contains("dimension") || !t["dimension"].is_string() ||
                    !t.value("optimum", Json()).is_number() || !t.value("weight", Json()).is_number())
                    fail("each term needs 'dimension', 'optimum' and 'weight'");
                r.terms.push_back({t["dimension"].get<std::string>(), t["optimum"].get<double>(),
                                   t["weight"].get<double>()});
            }
        }
        return r;
    }
    fail("unknown kind '" + kind + "'");
    return ConstantObjective{0.0};
}

// --- random search ----------------------------------------------------------

struct ConstantDuration {
    double seconds;
};
/// exp(N(mu, sigma^2)) seconds.
struct LogNormalDuration {
    double mu;
    double sigma;
};
using DurationModel = std::variant<ConstantDuration, LogNormalDuration>;

struct SearchOptions {
    std::string model_family = "model";
    std::string metric_name = "accuracy";
    bool higher_is_better = true;
    DurationModel duration = ConstantDuration{1.0};
};

/// Evaluates `budget` uniformly sampled hyperparameter values.
inline FamilyRun run_random_search(const SearchSpace& space, const SyntheticObjective& objective, std::int64_t budget,
                                   std::uint64_t seed, const SearchOptions& opts = {}) {
    if (budget < 1) throw DomainError("search budget B must be >= 1");
    const auto hs = sample(space, seed, budget);
    const auto width = std::to_string(budget - 1).size();

    FamilyRun run;
    run.model_family = opts.model_family;
    run.metric_name = opts.metric_name;
    run.higher_is_better = opts.higher_is_better;
    for (std::int64_t i = 0; i < budget; ++i) {
        TrialRecord t;
        t.model_family = opts.model_family;
        auto id = std::to_string(i);
        t.trial_id = "t" + std::string(width - id.size(), '0') + id;
        t.hyperparameters = hs[static_cast<std::size_t>(i)];
        try {
            t.validation_performance = evaluate(objective, t.hyperparameters, space, seed);
        } catch (const Error& e) {
            throw DomainError("trial " + std::to_string(i) + ": " + e.what());
        }
        if (!std::isfinite(t.validation_performance))
            throw DomainError("trial " + std::to_string(i) + ": objective returned a non-finite value");
        if (const auto* c = std::get_if<ConstantDuration>(&opts.duration)) {
            t.training_duration_seconds = c->seconds;
        } else {
            const auto& ln = std::get<LogNormalDuration>(opts.duration);
            auto gen = rng::substream(seed, "duration", static_cast<std::uint64_t>(i));
            t.training_duration_seconds = std::exp(ln.mu + ln.sigma * gen.normal());
        }
        t.metadata = Metadata{{"seed", std::to_string(seed)}, {"search", "uniform sampling"}};
        run.trials.push_back(std::move(t));
    }
    return run;
}

}  // namespace showwork
