// Acceptance suite: prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "showwork/showwork.hpp"
#include "test_support.hpp"

using namespace showwork;
using showwork::testkit::kToy;
using showwork::testkit::make_run;
using showwork::testkit::random_values;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok && pass) detail = what;
        pass = pass && ok;
    }
};

int failures = 0;

void report(int id, const std::string& name, const Outcome& o, double secs) {
    char timing[32];
    std::snprintf(timing, sizeof timing, "%.3f s", secs);
    std::cout << "AC" << id << ' ' << (o.pass ? "PASS" : "FAIL") << "  " << name << " (" << timing << ")";
    if (!o.detail.empty()) std::cout << ": " << o.detail;
    std::cout << '\n';
    if (!o.pass) ++failures;
}

std::string fixture(const std::string& name) { return std::string(SHOWWORK_FIXTURES) + "/" + name; }

// --- criteria ---------------------------------------------------------------

Outcome oracle_equivalence() {
    Outcome o;
    std::mt19937_64 gen(1);
    double worst_mean = 0, worst_std = 0;
    for (int rep = 0; rep < 200; ++rep) {
        const auto big_n = 2 + rep % 5;
        auto d = EmpiricalDistribution::from_values(random_values(gen, big_n));
        for (std::int64_t n = 1; n <= big_n; ++n) {
            const auto e = expected_max_by_enumeration(d, n);
            worst_mean = std::max(worst_mean, std::abs(expected_max(d, n) - e.expected));
            worst_std = std::max(worst_std, std::abs(std_of_max(d, n) - e.std));
        }
    }
    o.require(worst_mean <= 1e-12, "mean gap " + format_g17(worst_mean));
    o.require(worst_std <= 1e-12, "std gap " + format_g17(worst_std));
    if (o.pass) o.detail = "max |mean gap| " + format_g17(worst_mean) + ", max |std gap| " + format_g17(worst_std);
    return o;
}

Outcome curve_endpoints() {
    Outcome o;
    std::mt19937_64 gen(2);
    int checked = 0;
    for (int rep = 0; rep < 300; ++rep) {
        auto v = random_values(gen, rep < 200 ? 2 + rep % 5 : 1 + gen() % 200);
        if (rep % 7 == 0)
            for (auto& x : v) x = std::round(x * 8) / 8;
        const auto c = build_curve(make_run(v));
        double mean = 0;
        for (double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        o.require(std::abs(c.points.front().expected_max - mean) <= 1e-12, "n=1 differs from the mean");
        for (std::size_t i = 0; i < c.points.size(); ++i) {
            o.require(c.points[i].expected_max <= c.observed_max, "point above observed max");
            if (i) o.require(c.points[i].expected_max >= c.points[i - 1].expected_max, "curve decreases");
        }
        ++checked;
    }
    if (o.pass) o.detail = std::to_string(checked) + " distributions";
    return o;
}

Outcome toy_exactness() {
    Outcome o;
    const auto d = EmpiricalDistribution::from_values(kToy);
    const double e2 = expected_max_by_enumeration(d, 2).expected;
    const double e3 = expected_max_by_enumeration(d, 3).expected;
    o.require(std::abs(e2 - 2.2 / 9) <= 1e-12, "enumeration E[2] " + format_g17(e2));
    o.require(std::abs(e3 - 7.2 / 27) <= 1e-12, "enumeration E[3] " + format_g17(e3));
    o.require(std::abs(expected_max(d, 2) - e2) <= 1e-12, "closed form E[2] " + format_g17(expected_max(d, 2)));
    o.require(std::abs(expected_max(d, 3) - e3) <= 1e-12, "closed form E[3] " + format_g17(expected_max(d, 3)));
    if (o.pass) o.detail = "E[2] = " + format_g17(expected_max(d, 2)) + ", E[3] = " + format_g17(expected_max(d, 3));
    return o;
}

Outcome bootstrap_dominance() {
    // Values on a 1/1024 grid with N = 4: every step of both the closed form
    // and the enumeration is exact in double precision, so "= 0" is literal.
    Outcome o;
    std::mt19937_64 gen(4);
    std::vector<FamilyRun> runs;
    std::vector<std::int64_t> budgets;
    for (int i = 0; i < 10; ++i) {
        std::vector<double> v(4);
        for (auto& x : v) x = static_cast<double>(gen() % 1025) / 1024.0;
        runs.push_back(make_run(v, "d" + std::to_string(i)));
        budgets.push_back(2 + i % 3);
    }
    const std::vector<std::int64_t> schedule{100, 1000, 10000, 100000};
    int decreasing = 0;
    double closed_gap = 0, boot_gap_total = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        double first = 0, last = 0;
        for (std::size_t i = 0; i < runs.size(); ++i) {
            const auto truth = expected_max_by_enumeration(build_distribution(runs[i]), budgets[i]).expected;
            const auto profile = bootstrap_error_profile(runs[i], budgets[i], schedule, seed * 1000 + i);
            closed_gap = std::max(closed_gap, std::abs(profile.closed_form - truth));
            o.require(profile.closed_form_resampling_error == 0.0, "closed form reports resampling error");
            // Rows measure |bootstrap - closed form|, and the closed form equals the truth.
            first += profile.rows.front().abs_error;
            last += profile.rows.back().abs_error;
        }
        first /= static_cast<double>(runs.size());
        last /= static_cast<double>(runs.size());
        boot_gap_total += last;
        if (last < first) ++decreasing;
    }
    const double boot_gap = boot_gap_total / 20.0;
    o.require(closed_gap == 0.0, "closed form misses enumeration by " + format_g17(closed_gap));
    o.require(boot_gap > 0.0, "bootstrap error at K=1e5 is zero");
    o.require(decreasing >= 18, "error decreased in only " + std::to_string(decreasing) + "/20 seeds");
    if (o.pass)
        o.detail = "closed-form gap 0, mean bootstrap gap at K=1e5 " + format_g17(boot_gap) + ", decreasing in " +
                   std::to_string(decreasing) + "/20 seeds";
    return o;
}

Outcome crossover_reproduction() {
    Outcome o;
    const auto pair = recipes::crossing_pair();
    const auto runs = recipes::run_recipe(pair);
    std::vector<ExpectedMaxCurve> curves;
    for (const auto& r : runs) curves.push_back(build_curve(r));
    const auto v = compare_families(curves);
    o.require(v.crossovers.size() == 1, "expected exactly one crossover, got " + std::to_string(v.crossovers.size()));
    o.require(!v.crossovers.empty() && v.crossovers[0] == pair.crossover && pair.crossover == 7,
              "crossover at the wrong budget");
    o.require(v.segments.size() == 2 && v.segments[0].winner == "lr" && v.segments[1].winner == "cnn",
              "unexpected winners");
    if (o.pass) o.detail = "lr best for n <= 6, cnn best from n = " + std::to_string(v.crossovers[0]);
    return o;
}

Outcome budget_inference() {
    Outcome o;
    const auto toy = build_curve(make_run(kToy));
    o.require(min_budget_for_target(toy, 0.24) == 2, "toy target 0.24 is not 2");
    for (double t : {0.3000001, 0.31, 0.5, 10.0})
        o.require(!min_budget_for_target(toy, t).has_value(), "target above observed max reported reachable");

    std::mt19937_64 gen(6);
    const auto wide = build_curve(make_run(random_values(gen, 50)));
    for (const auto* c : {&toy, &wide}) {
        std::int64_t prev = 0;
        for (int k = 0; k < 100; ++k) {
            const double target = c->observed_min - 0.05 + (c->observed_max + 0.1 - c->observed_min) * k / 99.0;
            const auto n = min_budget_for_target(*c, target).value_or(c->max_budget() + 1);
            o.require(n >= prev, "budget decreases as the target rises");
            prev = n;
        }
    }
    return o;
}

Outcome time_axis() {
    Outcome o;
    std::mt19937_64 gen(128);
    const auto run = make_run(random_values(gen, 128), "bidaf", 31617.0);
    const auto curve = build_curve(run);
    const double reference = 0.5 * (curve.at(54).expected_max + curve.at(55).expected_max);
    const auto n = min_budget_for_target(curve, reference);
    o.require(n == 55, "reference crossed at n = " + std::to_string(n.value_or(-1)));
    const auto pts = to_time_axis(curve, run);
    o.require(n && pts[static_cast<std::size_t>(*n - 1)].budget == 55.0 * 31617.0, "wall clock is not 55 x 31617 s");
    if (o.pass) o.detail = "n = 55, wall clock " + format_shortest(pts[54].budget) + " s";
    return o;
}

Outcome round_trips() {
    Outcome o;
    std::mt19937_64 gen(8);
    std::vector<FamilyRun> runs;
    for (int f = 0; f < 3; ++f) {
        auto run = make_run(random_values(gen, 20), "fam" + std::to_string(f), 12.5);
        for (auto& t : run.trials) {
            t.hyperparameters.set("lr", std::uniform_real_distribution<double>(1e-5, 1e-1)(gen));
            t.hyperparameters.set("layers", static_cast<std::int64_t>(gen() % 4));
            t.metadata = Metadata{{"seed", "8"}};
        }
        runs.push_back(run);
    }
    std::ostringstream a, b;
    write_jsonl(a, runs);
    const auto back = ingest_trials(a.str());
    write_jsonl(b, back);
    o.require(back == runs, "JSONL round trip changed the model");
    o.require(a.str() == b.str(), "JSONL round trip changed the bytes");

    std::ifstream in(fixture("sst_cnn_report.json"));
    const auto report = report_from_json(Json::parse(in));
    const auto md1 = render_checklist(report, DocumentFormat::markdown);
    const auto reparsed = report_from_json(Json::parse(render_checklist(report, DocumentFormat::json)));
    o.require(render_checklist(reparsed, DocumentFormat::markdown) == md1, "checklist re-render differs");
    o.require(report_to_json(reparsed) == report_to_json(report), "checklist JSON round trip differs");

    for (int rep = 0; rep < 50; ++rep) {
        const auto c = build_curve(make_run(random_values(gen, 1 + gen() % 30)));
        const auto svg = render_curve_figure(std::span<const ExpectedMaxCurve>(&c, 1), BudgetAxis::trials());
        const auto at = svg.find("class=\"band\"");
        o.require(at != std::string::npos, "no band rendered");
        if (at == std::string::npos) break;
        const auto y0 = svg.find("data-y=\"", at) + 8;
        std::istringstream ys(svg.substr(y0, svg.find('"', y0) - y0));
        for (std::string tok; ys >> tok;) {
            const double y = std::stod(tok);
            o.require(y >= c.observed_min && y <= c.observed_max, "band vertex outside observed range");
        }
    }
    return o;
}

Outcome sampler_statistics() {
    Outcome o;
    SearchSpace s;
    s.add("lr", LogUniformFloat{1e-6, 1e-1}).add("k", UniformInteger{3, 6});
    const auto hs = sample(s, 9, 10'000);
    std::vector<double> u;
    bool seen[4] = {false, false, false, false};
    for (const auto& h : hs) {
        u.push_back((std::log10(std::get<double>(*h.find("lr"))) + 6.0) / 5.0);
        seen[std::get<std::int64_t>(*h.find("k")) - 3] = true;
    }
    std::sort(u.begin(), u.end());
    double ks = 0;
    const double n = static_cast<double>(u.size());
    for (std::size_t i = 0; i < u.size(); ++i)
        ks = std::max({ks, static_cast<double>(i + 1) / n - u[i], u[i] - static_cast<double>(i) / n});
    o.require(ks < 0.02, "KS distance " + format_g17(ks));
    o.require(seen[0] && seen[1] && seen[2] && seen[3], "uniform_integer(3, 6) missed a value");
    if (o.pass) o.detail = "KS distance " + format_fixed(ks, 4) + ", integers 3..6 all drawn";
    return o;
}

Outcome suite_runtime(double acceptance_secs, double& total) {
    Outcome o;
    const auto t0 = Clock::now();
    std::string list = SHOWWORK_UNIT_BINARIES;
    std::size_t start = 0;
    int binaries = 0;
    while (start <= list.size()) {
        const auto bar = list.find('|', start);
        const auto path = list.substr(start, bar == std::string::npos ? std::string::npos : bar - start);
        start = bar == std::string::npos ? list.size() + 1 : bar + 1;
        if (path.empty()) continue;
        const int rc = std::system(("\"" + path + "\" > /dev/null 2>&1").c_str());
        o.require(rc == 0, path + " failed");
        ++binaries;
    }
    total = seconds_since(t0) + acceptance_secs;
    o.require(total < 60.0, "suite took " + format_fixed(total, 1) + " s");
    if (o.pass)
        o.detail = std::to_string(binaries) + " unit binaries plus acceptance in " + format_fixed(total, 2) + " s";
    return o;
}

template <class Fn>
double timed(int id, const std::string& name, double limit, Fn&& fn) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
        o = fn();
    } catch (const std::exception& e) {
        o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = seconds_since(t0);
    if (limit > 0) o.require(secs < limit, "exceeded " + format_shortest(limit) + " s");
    report(id, name, o, secs);
    return secs;
}

}  // namespace

int main() {
    double own = 0;
    own += timed(1, "closed form matches exhaustive enumeration", 5.0, oracle_equivalence);
    own += timed(2, "curve starts at the mean, stays below the max, never decreases", 0, curve_endpoints);
    own += timed(3, "toy distribution values", 0, toy_exactness);
    own += timed(4, "closed form is exact where the bootstrap is not", 30.0, bootstrap_dominance);
    own += timed(5, "synthetic pair crosses once at the constructed budget", 0, crossover_reproduction);
    own += timed(6, "minimum budget for a target", 0, budget_inference);
    own += timed(7, "wall-clock budget from mean training duration", 0, time_axis);
    own += timed(8, "log, checklist and figure round trips", 0, round_trips);
    own += timed(9, "sampler distribution checks", 2.0, sampler_statistics);
    double total = 0;
    const auto t0 = Clock::now();
    Outcome o = suite_runtime(own, total);
    report(10, "full test suite under 60 s", o, seconds_since(t0));
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << '\n';
    return failures == 0 ? 0 : 1;
}
