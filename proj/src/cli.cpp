#include "weylscope/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>

#include "weylscope/catalog.hpp"
#include "weylscope/error.hpp"
#include "weylscope/parallel.hpp"
#include "weylscope/pipeline.hpp"
#include "weylscope/verify.hpp"

namespace weylscope::cli {

namespace {

using json = nlohmann::ordered_json;

// ------------------------------------------------------------ JSON output

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void emit(std::ostream& os, const json& j, int depth) {
    const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
    const std::string close(static_cast<std::size_t>(2 * depth), ' ');
    switch (j.type()) {
        case json::value_t::object: {
            if (j.empty()) {
                os << "{}";
                return;
            }
            os << "{\n";
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) os << ",\n";
                first = false;
                os << pad << json(it.key()).dump() << ": ";
                emit(os, it.value(), depth + 1);
            }
            os << "\n" << close << "}";
            return;
        }
        case json::value_t::array: {
            if (j.empty()) {
                os << "[]";
                return;
            }
            // short numeric arrays (points, eigenvalues) on one line
            const bool flat = j.size() <= 4 && std::all_of(j.begin(), j.end(), [](const json& x) { return x.is_primitive(); });
            if (flat) {
                os << "[";
                for (std::size_t i = 0; i < j.size(); ++i) {
                    if (i) os << ", ";
                    emit(os, j[i], depth + 1);
                }
                os << "]";
                return;
            }
            os << "[\n";
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) os << ",\n";
                os << pad;
                emit(os, j[i], depth + 1);
            }
            os << "\n" << close << "]";
            return;
        }
        case json::value_t::number_float: {
            const double v = j.get<double>();
            os << (std::isfinite(v) ? format_double(v) : "null");
            return;
        }
        default:
            os << j.dump();
    }
}

std::string to_text(const json& j) {
    std::ostringstream os;
    emit(os, j, 0);
    os << "\n";
    return os.str();
}

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

template <class T>
json optional_number(const std::optional<T>& v) {
    return v ? number(static_cast<double>(*v)) : json(nullptr);
}

json point_json(const ChartPoint& p) { return json::array({p[0], p[1], p[2], p[3]}); }

json conventions(Orientation o) {
    json c;
    c["riemann"] = "R_abcd with R = g_ac g_bd - g_ad g_bc on the unit sphere; s(S^4) = 12";
    c["two_form_norm"] = "|w|^2 = 1/2 w_ab w^ab";
    c["wplus_norm"] = "operator (Frobenius) norm on Lambda+; the full contraction W_abcd W^abcd is 4x";
    c["lambda_plus_basis"] = "(e01 + e23, e02 - e13, e03 + e12)/sqrt(2) in an oriented orthonormal coframe";
    c["orientation"] = o == Orientation::Chart ? "chart" : "reversed";
    c["kahler_potential"] = "g(d_uj, d_uk) = (phi_ujuk + phi_vjvk)/2 with z1 = x0 + i x1, z2 = x2 + i x3";
    c["eigenform_norm"] = "|w|^2 = 2";
    return c;
}

// ------------------------------------------------------------ inputs

struct LoadedMetric {
    MetricPtr metric;
    std::string source;
    std::optional<CatalogEntry> entry;
};

LoadedMetric load_metric(const std::string& src, bool apply_derdzinski) {
    LoadedMetric m;
    m.source = src;
    const bool looks_like_file = src.find('/') != std::string::npos || src.ends_with(".json");
    if (looks_like_file || std::filesystem::exists(src)) {
        m.metric = MetricFile::load(src).build();
    } else {
        m.entry = catalog_get(src);
        m.metric = m.entry->metric;
    }
    if (apply_derdzinski) m.metric = derdzinski(m.metric);
    return m;
}

json metric_json(const LoadedMetric& m) {
    json j;
    j["name"] = m.metric->name();
    j["source"] = m.source;
    j["provenance"] = to_string(m.metric->provenance());
    if (m.entry) j["coverage"] = m.entry->coverage;
    json box = json::array();
    for (const auto& b : m.metric->sample_box().bounds) box.push_back(json::array({number(b[0]), number(b[1])}));
    j["sample_box"] = box;
    return j;
}

ChartPoint parse_point(const std::string& s) {
    ChartPoint p{};
    std::stringstream ss(s);
    std::string item;
    int n = 0;
    while (std::getline(ss, item, ',')) {
        if (n >= 4) throw InputError("--point needs exactly 4 coordinates, got more in '" + s + "'");
        try {
            std::size_t used = 0;
            p[static_cast<std::size_t>(n)] = std::stod(item, &used);
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw InputError("--point: cannot read '" + item + "' as a number");
        }
        ++n;
    }
    if (n != 4) throw InputError("--point needs exactly 4 coordinates, got " + std::to_string(n));
    return p;
}

Orientation parse_orientation(const std::string& s) {
    if (s == "chart") return Orientation::Chart;
    if (s == "reversed" || s == "flip") return Orientation::Reversed;
    throw InputError("--orientation must be chart or reversed (flip), got '" + s + "'");
}

Box shrink(const Box& b, double margin) {
    Box r = b;
    for (auto& lim : r.bounds) {
        lim[0] += margin;
        lim[1] -= margin;
        if (!(lim[0] <= lim[1])) throw InputError("margin leaves an empty box");
    }
    return r;
}

std::vector<ChartPoint> random_points(const Box& box, int n, std::uint64_t seed) {
    if (!box.is_finite()) throw InputError("random points need a finite sample box");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<ChartPoint> pts(static_cast<std::size_t>(std::max(n, 0)));
    for (auto& p : pts)
        for (int a = 0; a < 4; ++a) {
            const auto& lim = box.bounds[static_cast<std::size_t>(a)];
            p[static_cast<std::size_t>(a)] = lim[0] + (lim[1] - lim[0]) * u(rng);
        }
    return pts;
}

// Points for verification suites: 5% inset from the sample box faces.
std::vector<ChartPoint> suite_points(const MetricField& g, int n, std::uint64_t seed) {
    Box b = g.sample_box();
    double width = 1e300;
    for (const auto& lim : b.bounds) width = std::min(width, lim[1] - lim[0]);
    return random_points(shrink(b, 0.05 * width), n, seed);
}

// ------------------------------------------------------------ records

json record_json(const PipelineRecord& r, const std::optional<ResidualReport>& div) {
    json j;
    j["point"] = point_json(r.point);
    j["ok"] = r.ok;
    if (!r.ok) j["error"] = r.error;
    if (r.has_spectrum) {
        const double norm = std::sqrt(r.spectrum.norm2);
        j["s"] = number(r.s);
        j["alpha"] = number(r.spectrum.alpha);
        j["beta"] = number(r.spectrum.beta);
        j["gamma"] = number(r.spectrum.gamma);
        j["det"] = number(r.spectrum.det);
        j["wplus_norm2"] = number(r.spectrum.norm2);
        j["normalized_det"] = norm > 0 ? number(r.spectrum.det / (norm * norm * norm)) : json(nullptr);
        j["gap"] = number(r.spectrum.gap);
        j["classification"] = to_string(r.classification.cls);
        j["sign_rule"] = r.classification.signs_agree;
        if (r.threshold) {
            json t;
            t["beta_le_alpha_over_4"] = r.threshold->lhs;
            t["det_ge_threshold"] = r.threshold->rhs;
            t["agree"] = r.threshold->agree;
            t["boundary"] = r.threshold->boundary;
            j["threshold"] = t;
        } else {
            j["threshold"] = nullptr;
        }
    }
    j["f"] = optional_number(r.f);
    j["alpha_g"] = optional_number(r.alpha_g);
    j["alpha_g_f"] = (r.f && r.alpha_g) ? number(*r.alpha_g * *r.f) : json(nullptr);
    j["s_g"] = optional_number(r.s_g);
    if (r.residual) {
        json k;
        k["norm"] = number(r.residual->norm);
        k["wplus_term"] = number(r.residual->wplus_term);
        k["beta_term"] = number(r.residual->beta_term);
        j["kahler_residual"] = k;
    } else {
        j["kahler_residual"] = nullptr;
    }
    if (div) {
        json res;
        res["delta_wplus"] = {{"residual", number(div->residual)}, {"scale", number(div->scale)},
                              {"relative", number(div->relative)}};
        j["residuals"] = res;
    }
    return j;
}

json summary_json(const PipelineResult& res) {
    json s;
    std::size_t failures = 0;
    bool any_spectrum = false;
    for (const auto& r : res.records) {
        failures += r.ok ? 0 : 1;
        any_spectrum = any_spectrum || r.has_spectrum;
    }
    s["count"] = res.records.size();
    s["failures"] = failures;
    // null rather than a fake extremum when nothing was evaluated
    s["min_det"] = any_spectrum ? number(res.min_det) : json(nullptr);
    s["min_gap"] = any_spectrum ? number(res.min_gap) : json(nullptr);
    s["max_kahler_residual"] = number(res.max_residual);
    s["max_alpha_f_defect"] = number(res.max_alpha_f_defect);
    s["verdict"] = res.verdict;
    return s;
}

std::string csv_records(const PipelineResult& res, const std::vector<std::optional<ResidualReport>>& divs) {
    std::ostringstream os;
    os << "x0,x1,x2,x3,ok,s,alpha,beta,gamma,det,wplus_norm2,normalized_det,classification,threshold_agree,f,"
          "alpha_g_f,kahler_residual,delta_wplus_relative,error\n";
    const auto d = [](double v) { return std::isfinite(v) ? format_double(v) : std::string(); };
    const auto od = [&](const std::optional<double>& v) { return v ? d(*v) : std::string(); };
    for (std::size_t i = 0; i < res.records.size(); ++i) {
        const PipelineRecord& r = res.records[i];
        for (double x : r.point) os << d(x) << ",";
        os << (r.ok ? "true" : "false") << ",";
        if (r.has_spectrum) {
            const double norm = std::sqrt(r.spectrum.norm2);
            os << d(r.s) << "," << d(r.spectrum.alpha) << "," << d(r.spectrum.beta) << "," << d(r.spectrum.gamma)
               << "," << d(r.spectrum.det) << "," << d(r.spectrum.norm2) << ","
               << (norm > 0 ? d(r.spectrum.det / (norm * norm * norm)) : "") << ","
               << to_string(r.classification.cls) << ","
               << (r.threshold ? (r.threshold->agree ? "true" : "false") : "") << ",";
        } else {
            os << ",,,,,,,,,";
        }
        os << od(r.f) << "," << ((r.f && r.alpha_g) ? d(*r.alpha_g * *r.f) : "") << ","
           << (r.residual ? d(r.residual->norm) : "") << "," << (divs[i] ? d(divs[i]->relative) : "") << ",";
        std::string e = r.error;
        for (char& c : e)
            if (c == ',' || c == '\n') c = ';';
        os << e << "\n";
    }
    return os.str();
}

// ------------------------------------------------------------ output plumbing

struct Output {
    std::ostream& out;
    std::string path;

    void write(const std::string& text) const {
        if (path.empty()) {
            out << text;
            return;
        }
        std::ofstream f(path, std::ios::binary);
        if (!f) throw InputError("cannot write '" + path + "'");
        f << text;
        if (!f) throw InputError("write to '" + path + "' failed");
    }
};

json report_header(const std::string& command, Orientation o) {
    json j;
    j["schema"] = kReportSchema;
    j["tool"] = "weylscope";
    j["version"] = kVersion;
    j["command"] = command;
    j["conventions"] = conventions(o);
    return j;
}

// ------------------------------------------------------------ analyze / scan

struct AnalysisFlags {
    std::string metric;
    bool derdzinski = false;
    std::string format = "json";
    std::string out;
    int threads = 0;
    std::string orientation = "chart";
    double gap_tol = kDefaultGapTol;
    double kahler_tol = 1e-6;
};

PipelineResult analyse_points(const MetricPtr& h, const std::vector<ChartPoint>& pts, const AnalysisFlags& fl,
                              std::vector<std::optional<ResidualReport>>& divs) {
    PipelineOptions opt;
    opt.gap_tol = fl.gap_tol;
    opt.kahler_tol = fl.kahler_tol;
    opt.threads = resolve_threads(fl.threads);
    opt.orientation = parse_orientation(fl.orientation);
    PipelineResult res = run_pipeline(h, pts, opt);
    divs.assign(pts.size(), std::nullopt);
    parallel_for(pts.size(), opt.threads, [&](std::size_t i) {
        if (!res.records[i].has_spectrum) return;
        try {
            divs[i] = divergence_weyl(*h, pts[i], opt.orientation);
        } catch (const DomainError&) {
        }
    });
    return res;
}

int cmd_analyze(const AnalysisFlags& fl, const std::string& point_src, const Output& o, std::ostream& err) {
    const LoadedMetric m = load_metric(fl.metric, fl.derdzinski);
    const ChartPoint p = parse_point(point_src);
    if (!m.metric->domain().contains(p)) throw InputError("point lies outside the metric's domain");
    std::vector<std::optional<ResidualReport>> divs;
    const PipelineResult res = analyse_points(m.metric, {p}, fl, divs);
    const PipelineRecord& r = res.records[0];
    if (!r.ok) {
        err << "error: " << r.error << "\n";
        return DomainFailure;
    }
    if (fl.format == "csv") {
        o.write(csv_records(res, divs));
        return Ok;
    }
    json j = report_header("analyze", parse_orientation(fl.orientation));
    j["metric"] = metric_json(m);
    j["parameters"] = {{"gap_tol", fl.gap_tol}, {"kahler_tol", fl.kahler_tol}};
    json rec = record_json(r, divs[0]);
    json lemmas = json::array();
    for (const LemmaCheck& c : lemma_suite(*m.metric, p, 1e-9, fl.gap_tol)) {
        lemmas.push_back({{"name", c.name},
                          {"applicable", c.applicable},
                          {"passed", c.passed},
                          {"slack", number(c.slack)},
                          {"note", c.note}});
    }
    rec["lemmas"] = lemmas;
    j["records"] = json::array({rec});
    j["summary"] = summary_json(res);
    o.write(to_text(j));
    return Ok;
}

int cmd_scan(const AnalysisFlags& fl, std::optional<int> grid, std::optional<int> random, std::uint64_t seed,
             double margin, bool strict, const Output& o, std::ostream& err) {
    const LoadedMetric m = load_metric(fl.metric, fl.derdzinski);
    const Box box = m.metric->sample_box();
    std::vector<ChartPoint> pts;
    if (grid) {
        if (*grid < 0) throw InputError("--grid must be >= 0");
        pts = grid_points(box, *grid, margin);
    } else {
        if (*random < 0) throw InputError("--random must be >= 0");
        pts = random_points(shrink(box, margin), *random, seed);
    }
    std::vector<std::optional<ResidualReport>> divs;
    const PipelineResult res = analyse_points(m.metric, pts, fl, divs);
    if (strict)
        for (const auto& r : res.records)
            if (!r.ok) {
                err << "error at (" << format_double(r.point[0]) << ", " << format_double(r.point[1]) << ", "
                    << format_double(r.point[2]) << ", " << format_double(r.point[3]) << "): " << r.error << "\n";
                return DomainFailure;
            }
    if (fl.format == "csv") {
        o.write(csv_records(res, divs));
        return Ok;
    }
    json j = report_header("scan", parse_orientation(fl.orientation));
    j["metric"] = metric_json(m);
    json params;
    if (grid)
        params["grid"] = *grid;
    else {
        params["random"] = *random;
        params["seed"] = seed;
    }
    params["margin"] = margin;
    params["gap_tol"] = fl.gap_tol;
    params["kahler_tol"] = fl.kahler_tol;
    j["parameters"] = params;
    json recs = json::array();
    for (std::size_t i = 0; i < res.records.size(); ++i) recs.push_back(record_json(res.records[i], divs[i]));
    j["records"] = recs;
    j["summary"] = summary_json(res);
    o.write(to_text(j));
    return Ok;
}

// ------------------------------------------------------------ verify

struct Check {
    Check() = default;
    Check(std::string n, bool ok, double v, double tol) : name(std::move(n)), passed(ok), value(v), tolerance(tol) {}

    std::string name;
    bool passed = false;
    double value = 0.0;
    double tolerance = 0.0;
    json detail = json::object();
};

struct Suite {
    Suite(std::string n, std::string m) : name(std::move(n)), metric(std::move(m)) {}

    std::string name;
    std::string metric;
    std::vector<Check> checks;
    json info = json::object();
    bool passed() const {
        return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
    }
};

struct VerifyFlags {
    std::string suite;
    std::optional<std::string> metric;
    std::uint64_t seed = 42;
    std::optional<std::uint64_t> samples;
    std::optional<double> tol;
    int points = 20;
    int threads = 0;
    std::string factor = "1 + 0.1*exp(-(x0^2 + x1^2 + x2^2 + x3^2))";
};

// Max of a residual over points, with the worst point.
Check max_residual_check(const std::string& name, const std::vector<ResidualReport>& reps, double tol) {
    Check c;
    c.name = name;
    c.tolerance = tol;
    double worst = -1.0;
    const ResidualReport* at = nullptr;
    for (const auto& r : reps)
        if (r.relative > worst) {
            worst = r.relative;
            at = &r;
        }
    c.value = std::max(worst, 0.0);
    c.passed = worst <= tol;
    if (at) {
        c.detail["worst_point"] = point_json(at->point);
        c.detail["residual"] = number(at->residual);
        c.detail["scale"] = number(at->scale);
    }
    c.detail["points"] = reps.size();
    return c;
}

template <class F>
std::vector<ResidualReport> over_points(const std::vector<ChartPoint>& pts, int threads, F&& f) {
    std::vector<ResidualReport> out(pts.size());
    parallel_for(pts.size(), threads, [&](std::size_t i) { out[i] = f(pts[i]); });
    return out;
}

std::string metric_or(const VerifyFlags& fl, const char* fallback) { return fl.metric ? *fl.metric : fallback; }

Suite suite_einstein(const VerifyFlags& fl, int threads) {
    Suite s{"einstein", metric_or(fl, "fubini_study")};
    const MetricPtr g = load_metric(s.metric, false).metric;
    const auto pts = suite_points(*g, fl.points, fl.seed);
    const auto ric = over_points(pts, threads, [&](const ChartPoint& p) {
        const CurvatureJets c = curvature_jets(*g, p, 0);
        const CurvatureDecomposition d = decomposition_of(c);
        const Mat4 gi = values(c.frame.ginv);
        const double n = std::sqrt(std::max((gi * d.ricci0 * gi * d.ricci0).trace(), 0.0));
        return make_residual("trace-free Ricci", p, n, std::abs(d.s) / 4.0);
    });
    s.checks.push_back(max_residual_check("trace-free Ricci vanishes", ric, fl.tol.value_or(1e-8)));
    const auto div = over_points(pts, threads, [&](const ChartPoint& p) { return divergence_weyl(*g, p); });
    s.checks.push_back(max_residual_check("W+ is harmonic", div, fl.tol.value_or(1e-8)));
    return s;
}

Suite suite_weighted(const VerifyFlags& fl, int threads) {
    Suite s{"weighted", metric_or(fl, "fubini_study")};
    const MetricPtr h = load_metric(s.metric, false).metric;
    const ScalarFieldPtr f = scalar_from_source(fl.factor);
    const MetricPtr g = conformal_rescale(h, f);
    s.info["factor"] = fl.factor;
    const auto pts = suite_points(*h, fl.points, fl.seed);
    const auto pre = over_points(pts, threads, [&](const ChartPoint& p) { return divergence_weyl(*h, p); });
    s.checks.push_back(max_residual_check("source metric has harmonic W+", pre, 1e-7));
    const auto w = over_points(pts, threads, [&](const ChartPoint& p) { return weighted_divergence(*g, *f, p); });
    s.checks.push_back(max_residual_check("f W+ of f^-2 h is divergence free", w, fl.tol.value_or(1e-6)));
    const auto plain = over_points(pts, threads, [&](const ChartPoint& p) { return divergence_weyl(*g, p); });
    double m = 0.0;
    for (const auto& r : plain) m = std::max(m, r.relative);
    s.info["plain_divergence_of_rescaled_max"] = number(m);
    return s;
}

Suite suite_weitzenboeck(const VerifyFlags& fl, int threads) {
    Suite s{"weitzenboeck", metric_or(fl, "fubini_study")};
    const MetricPtr h = load_metric(s.metric, false).metric;
    const ScalarFieldPtr f = scalar_from_source(fl.factor);
    s.info["factor"] = fl.factor;
    const auto pts = suite_points(*h, fl.points, fl.seed);
    TwoFormField w;
    if (h->kahler_form(h->sample_box().center(), 0)) {
        w = scaled_kahler_form(h, scalar_from_source("1 + x0^2"));
        s.info["test_form"] = "(1 + x0^2) * Kahler form, projected to Lambda+";
    } else {
        const Expression a = parse_expression("1 + x0^2"), z = parse_expression("0");
        w = two_form_from_expressions({a, z, z, z, z, a});
        s.info["test_form"] = "(1 + x0^2) (dx0^dx1 + dx2^dx3), projected to Lambda+";
    }
    const auto form = over_points(pts, threads, [&](const ChartPoint& p) { return weitzenboeck_form(*h, w, p, true).residual; });
    s.checks.push_back(max_residual_check("Hodge Laplacian on self-dual forms", form, fl.tol.value_or(1e-6)));
    std::vector<WeitzenboeckWeylReport> reps(pts.size());
    parallel_for(pts.size(), threads, [&](std::size_t i) { reps[i] = weitzenboeck_weyl(h, f, pts[i]); });
    std::vector<ResidualReport> pre, res;
    for (const auto& r : reps) {
        pre.push_back(r.precondition);
        res.push_back(r.residual);
    }
    s.checks.push_back(max_residual_check("source metric has harmonic W+", pre, 1e-7));
    s.checks.push_back(max_residual_check("rough Laplacian of f W+", res, fl.tol.value_or(1e-5)));
    return s;
}

MetricPtr conformally_kahler_g(const MetricPtr& m) {
    if (m->provenance() == Provenance::KahlerPotential) return rescale_to_g(derdzinski(m));
    return rescale_to_g(m);
}

Suite suite_lemmas(const VerifyFlags& fl, int threads) {
    Suite s{"lemmas", metric_or(fl, "fs_perturbed:0.03:2")};
    const MetricPtr m = load_metric(s.metric, false).metric;
    const MetricPtr g = conformally_kahler_g(m);
    s.info["evaluated_on"] = g->name();
    const auto pts = suite_points(*m, fl.points, fl.seed);
    std::vector<std::vector<LemmaCheck>> all(pts.size());
    parallel_for(pts.size(), threads, [&](std::size_t i) { all[i] = lemma_suite(*g, pts[i]); });
    const double tol = fl.tol.value_or(1e-9);
    for (std::size_t k = 0; k < (all.empty() ? 0 : all[0].size()); ++k) {
        Check c;
        c.name = all[0][k].name;
        c.tolerance = tol;
        c.passed = true;
        double min_slack = std::numeric_limits<double>::infinity();
        std::size_t applicable = 0;
        for (const auto& at : all) {
            const LemmaCheck& l = at[k];
            if (!l.applicable) continue;
            ++applicable;
            min_slack = std::min(min_slack, l.slack);
            c.passed = c.passed && l.passed;
        }
        c.value = applicable ? min_slack : 0.0;
        c.detail["applicable_points"] = applicable;
        s.checks.push_back(c);
    }
    // equality case on a Kahler-Einstein reference
    const auto fs = catalog_get("fubini_study").metric;
    const auto ref = lemma_suite(*fs, suite_points(*fs, 1, fl.seed)[0]);
    Check eq;
    eq.name = "norm bound equality on Fubini-Study";
    eq.tolerance = 1e-9;
    for (const auto& l : ref)
        if (l.name == "norm_lower_bound") eq.value = std::abs(l.slack);
    eq.passed = eq.value <= eq.tolerance;
    s.checks.push_back(eq);
    return s;
}

Suite suite_oracle(const VerifyFlags& fl, int threads) {
    Suite s{"oracle", ""};
    const std::uint64_t n = fl.samples.value_or(1000000);
    const OracleReport r = random_spectrum_oracle(fl.seed, n, threads);
    Check c;
    c.name = "random traceless spectra";
    c.value = static_cast<double>(r.counterexamples.size());
    c.passed = r.counterexamples.empty();
    c.detail["samples"] = r.samples;
    c.detail["seed"] = r.seed;
    c.detail["sign_rule_checked"] = r.sign_rule_checked;
    c.detail["zero_band"] = r.zero_band;
    c.detail["boundary_excluded"] = r.boundary_excluded;
    c.detail["max_trace"] = number(r.max_trace);
    c.detail["max_norm_identity_defect"] = number(r.max_norm_identity_defect);
    json ce = json::array();
    for (const auto& x : r.counterexamples)
        ce.push_back({{"index", x.index},
                      {"check", x.check},
                      {"eigenvalues", json::array({x.eigenvalues[0], x.eigenvalues[1], x.eigenvalues[2]})},
                      {"det", number(x.det)}});
    c.detail["counterexamples"] = ce;
    s.checks.push_back(c);
    Check m;
    m.name = "ratio function decreasing";
    m.passed = r.monotone;
    m.value = r.monotone ? 0.0 : 1.0;
    s.checks.push_back(m);
    Check b;
    b.name = "boundary witness diag(4, 1, -5)";
    const Mat3 w = Vec3(4, 1, -5).asDiagonal();
    const ThresholdRecord t = threshold_check(weyl_spectrum(w));
    b.value = std::abs(t.normalized_det - det_threshold());
    b.tolerance = 1e-12;
    b.passed = b.value <= b.tolerance && t.boundary && spectrum_checks(w).boundary_excluded == 1;
    b.detail["threshold"] = det_threshold();
    s.checks.push_back(b);
    return s;
}

Suite suite_quadrature(const VerifyFlags& fl, int threads) {
    Suite s{"quadrature", ""};
    const std::uint64_t n = fl.samples.value_or(100000);
    const double pi2 = std::numbers::pi * std::numbers::pi;
    const auto z_check = [&](const std::string& name, const QuadratureEstimate& e, double exact, double norm) {
        Check c;
        c.name = name;
        c.tolerance = fl.tol.value_or(3.0);
        c.value = e.stderr_ > 0 ? std::abs(e.value - exact) / e.stderr_ : std::abs(e.value - exact);
        c.passed = c.value <= c.tolerance;
        c.detail["estimate"] = number(e.value / norm);
        c.detail["stderr"] = number(e.stderr_ / norm);
        c.detail["exact"] = exact / norm;
        c.detail["samples"] = e.samples;
        c.detail["seed"] = e.seed;
        return c;
    };
    const auto s4 = catalog_get("round_s4").metric;
    const auto e1 = integrate(*s4, scalar_curvature_integrand(s4), Box::whole_space(), n, fl.seed, threads);
    s.checks.push_back(z_check("total scalar curvature of S^4 (32 pi^2)", e1, 32.0 * pi2, 1.0));
    const auto fs = catalog_get("fubini_study").metric;
    const auto e2 = integrate(*fs, signature_integrand(fs), Box::whole_space(), n, fl.seed + 1, threads);
    Check sig = z_check("signature of CP^2 from |W+|^2 - |W-|^2 over 12 pi^2", e2, 12.0 * pi2, 12.0 * pi2);
    sig.detail["tensor_norm_estimate"] = number(4.0 * e2.value / (12.0 * pi2));
    s.checks.push_back(sig);
    return s;
}

Suite suite_pipeline(const VerifyFlags& fl, int threads) {
    Suite s{"pipeline", metric_or(fl, "fs_perturbed:0.03:2")};
    MetricPtr h = load_metric(s.metric, false).metric;
    if (h->provenance() == Provenance::KahlerPotential) h = derdzinski(h);
    s.info["h"] = h->name();
    const auto pts = suite_points(*h, fl.points, fl.seed);
    PipelineOptions opt;
    opt.threads = threads;
    const PipelineResult res = run_pipeline(h, pts, opt);
    Check ok{"every point rescales", true, 0.0, 0.0};
    double af = 0.0, sg = 0.0, kr = 0.0, mindet = std::numeric_limits<double>::infinity();
    for (const auto& r : res.records) {
        if (!r.ok) {
            if (ok.passed) ok.detail["first_error"] = {{"point", point_json(r.point)}, {"error", r.error}};
            ok.passed = false;
            ok.value += 1;
            continue;
        }
        af = std::max(af, std::abs(*r.alpha_g * *r.f - 1.0));
        sg = std::max(sg, std::abs(*r.s_g - 6.0 * *r.alpha_g) / std::max(1.0, std::abs(*r.s_g)));
        if (r.residual) kr = std::max(kr, r.residual->norm);
        mindet = std::min(mindet, r.spectrum.det);
    }
    s.checks.push_back(ok);
    s.checks.push_back({"alpha_g f = 1", af <= 1e-8, af, 1e-8});
    s.checks.push_back({"s_g = 6 alpha_g", sg <= 1e-6, sg, 1e-6});
    s.checks.push_back({"det W+ of h positive", mindet > 0.0, number(mindet).is_null() ? 0.0 : mindet, 0.0});
    s.checks.push_back({"Kahler residual of g", kr <= fl.tol.value_or(1e-6), kr, fl.tol.value_or(1e-6)});
    const auto div = over_points(pts, threads, [&](const ChartPoint& p) { return divergence_weyl(*h, p); });
    s.checks.push_back(max_residual_check("W+ of h is harmonic", div, fl.tol.value_or(1e-6)));
    s.info["verdict"] = res.verdict;
    return s;
}

Suite suite_roundtrip(const VerifyFlags& fl, int threads) {
    Suite s{"roundtrip", metric_or(fl, "fs_perturbed:0.03:2")};
    const MetricPtr g = load_metric(s.metric, false).metric;
    const auto pts = suite_points(*g, fl.points, fl.seed);
    const RoundTripReport r = roundtrip(g, pts, threads);
    const double tol = fl.tol.value_or(1e-6);
    double af = 0.0;
    for (const auto& p : r.points) af = std::max(af, p.alpha_f_defect);
    Check ratio{"g'/g = 6^(-2/3)", r.max_deviation <= tol, r.max_deviation, tol};
    ratio.detail["expected_ratio"] = r.expected_ratio;
    ratio.detail["points"] = r.points.size();
    s.checks.push_back(ratio);
    s.checks.push_back({"Kahler residual of g'", r.max_residual <= tol, r.max_residual, tol});
    s.checks.push_back({"alpha f = 1 on g'", af <= 1e-8, af, 1e-8});
    return s;
}

json suite_json(const Suite& s) {
    json j;
    j["suite"] = s.name;
    if (!s.metric.empty()) j["metric"] = s.metric;
    j["passed"] = s.passed();
    for (auto it = s.info.begin(); it != s.info.end(); ++it) j[it.key()] = it.value();
    json cs = json::array();
    for (const auto& c : s.checks) {
        json x;
        x["name"] = c.name;
        x["passed"] = c.passed;
        x["value"] = number(c.value);
        x["tolerance"] = number(c.tolerance);
        if (!c.detail.empty()) x["detail"] = c.detail;
        cs.push_back(x);
    }
    j["checks"] = cs;
    return j;
}

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names = {"einstein", "weighted", "weitzenboeck", "lemmas",
                                                   "oracle",   "quadrature", "pipeline",   "roundtrip"};
    return names;
}

int cmd_verify(const VerifyFlags& fl, const Output& o) {
    std::vector<std::string> which;
    if (fl.suite == "all")
        which = suite_names();
    else if (std::find(suite_names().begin(), suite_names().end(), fl.suite) != suite_names().end())
        which = {fl.suite};
    else
        throw InputError("unknown suite '" + fl.suite + "'");
    if (fl.points < 1) throw InputError("--points must be >= 1");
    const int threads = resolve_threads(fl.threads);

    std::vector<Suite> suites;
    for (const auto& name : which) {
        if (name == "einstein") suites.push_back(suite_einstein(fl, threads));
        if (name == "weighted") suites.push_back(suite_weighted(fl, threads));
        if (name == "weitzenboeck") suites.push_back(suite_weitzenboeck(fl, threads));
        if (name == "lemmas") suites.push_back(suite_lemmas(fl, threads));
        if (name == "oracle") suites.push_back(suite_oracle(fl, threads));
        if (name == "quadrature") suites.push_back(suite_quadrature(fl, threads));
        if (name == "pipeline") suites.push_back(suite_pipeline(fl, threads));
        if (name == "roundtrip") suites.push_back(suite_roundtrip(fl, threads));
    }

    json j = report_header("verify", Orientation::Chart);
    json params;
    params["suite"] = fl.suite;
    params["seed"] = fl.seed;
    params["points"] = fl.points;
    params["samples"] = fl.samples ? json(*fl.samples) : json(nullptr);
    params["tol"] = fl.tol ? number(*fl.tol) : json(nullptr);
    params["metric"] = fl.metric ? json(*fl.metric) : json(nullptr);
    j["parameters"] = params;
    json arr = json::array();
    bool passed = true;
    json first = nullptr;
    for (const auto& s : suites) {
        arr.push_back(suite_json(s));
        for (const auto& c : s.checks)
            if (!c.passed && first.is_null()) {
                first = {{"suite", s.name}, {"check", c.name}, {"value", number(c.value)}, {"tolerance", number(c.tolerance)}};
                if (!c.detail.empty()) first["detail"] = c.detail;
            }
        passed = passed && s.passed();
    }
    j["suites"] = arr;
    j["passed"] = passed;
    j["first_failure"] = first;
    o.write(to_text(j));
    return passed ? Ok : VerifyFailed;
}

// ------------------------------------------------------------ catalog

json truth_json(const GroundTruth& t) {
    json j;
    j["s"] = optional_number(t.s);
    j["wplus"] = t.wplus ? json::array({(*t.wplus)[0], (*t.wplus)[1], (*t.wplus)[2]}) : json(nullptr);
    j["einstein"] = t.einstein;
    j["kahler"] = t.kahler;
    j["det_sign"] = t.det_sign;
    j["einstein_constant"] = optional_number(t.einstein_constant);
    return j;
}

json entry_json(const CatalogEntry& e) {
    json j;
    j["name"] = e.name;
    j["description"] = e.description;
    j["coverage"] = e.coverage;
    j["potential"] = e.potential ? json(*e.potential) : json(nullptr);
    json box = json::array();
    for (const auto& b : e.metric->sample_box().bounds) box.push_back(json::array({number(b[0]), number(b[1])}));
    j["sample_box"] = box;
    j["truth"] = truth_json(e.truth);
    return j;
}

std::string entry_line(const CatalogEntry& e) {
    const auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string("-"); };
    std::string w = "-";
    if (e.truth.wplus)
        w = "(" + format_double((*e.truth.wplus)[0]) + ", " + format_double((*e.truth.wplus)[1]) + ", " +
            format_double((*e.truth.wplus)[2]) + ")";
    char buf[512];
    std::snprintf(buf, sizeof buf, "%-22s %-8s %-8s %-10s %-36s %s\n", e.name.c_str(), e.truth.kahler ? "yes" : "no",
                  e.truth.einstein ? "yes" : "no", opt(e.truth.s).c_str(), w.c_str(), e.coverage.c_str());
    return buf;
}

int cmd_catalog(bool as_json, const std::optional<std::string>& name, const Output& o) {
    std::vector<CatalogEntry> entries;
    if (name)
        entries.push_back(catalog_get(*name));
    else
        entries = list_catalog();
    if (as_json) {
        json j;
        j["schema"] = kCatalogSchema;
        j["version"] = kVersion;
        json arr = json::array();
        for (const auto& e : entries) arr.push_back(entry_json(e));
        j["entries"] = arr;
        o.write(to_text(j));
        return Ok;
    }
    char head[256];
    std::snprintf(head, sizeof head, "%-22s %-8s %-8s %-10s %-36s %s\n", "name", "kahler", "einstein", "s",
                  "W+ eigenvalues", "coverage");
    std::string text = head;
    for (const auto& e : entries) text += entry_line(e);
    o.write(text);
    return Ok;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"weylscope: curvature of oriented Riemannian 4-manifolds on coordinate charts"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    AnalysisFlags af;
    std::string point;
    const auto add_analysis_flags = [&](CLI::App* c) {
        c->add_option("--metric", af.metric, "catalog name (e.g. fs_perturbed:0.03:2) or metric JSON file")->required();
        c->add_flag("--derdzinski", af.derdzinski, "analyse s^-2 g instead of the Kahler metric g");
        c->add_option("--format", af.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
        c->add_option("--out", af.out, "write the report to this file");
        c->add_option("--threads", af.threads, "worker threads (0: WEYLSCOPE_THREADS or hardware count)");
        c->add_option("--orientation", af.orientation, "chart or reversed (alias flip)");
        c->add_option("--gap-tol", af.gap_tol, "relative spectral gap below which the top eigenvalue is not simple");
    };

    CLI::App* analyze = app.add_subcommand("analyze", "full analysis at one point");
    add_analysis_flags(analyze);
    analyze->add_option("--point", point, "x0,x1,x2,x3")->required();
    analyze->add_option("--kahler-tol", af.kahler_tol, "Kahler residual tolerance for the verdict");

    CLI::App* scan = app.add_subcommand("scan", "analysis over a grid or random points in the sample box");
    add_analysis_flags(scan);
    std::optional<int> grid, random;
    std::uint64_t scan_seed = 42;
    double margin = 1e-3;
    bool strict = false;
    auto* g_opt = scan->add_option("--grid", grid, "n^4 grid points");
    auto* r_opt = scan->add_option("--random", random, "number of uniform random points");
    g_opt->excludes(r_opt);
    scan->add_option("--seed", scan_seed, "seed for --random");
    scan->add_option("--tol", af.kahler_tol, "Kahler residual tolerance for the verdict");
    scan->add_option("--margin", margin, "inset from the sample box faces");
    scan->add_flag("--strict", strict, "fail on the first point that cannot be analysed");

    CLI::App* verify = app.add_subcommand("verify", "run verification suites");
    VerifyFlags vf;
    std::string verify_out;
    verify->add_option("--suite", vf.suite,
                       "einstein, weighted, weitzenboeck, lemmas, oracle, quadrature, pipeline, roundtrip or all")
        ->required();
    verify->add_option("--metric", vf.metric, "metric for the suites that take one");
    verify->add_option("--seed", vf.seed, "seed for sample points and Monte Carlo");
    verify->add_option("--samples", vf.samples, "oracle matrices / quadrature samples");
    verify->add_option("--tol", vf.tol, "override the suite's residual tolerance");
    verify->add_option("--points", vf.points, "sample points per suite");
    verify->add_option("--threads", vf.threads, "worker threads (0: WEYLSCOPE_THREADS or hardware count)");
    verify->add_option("--factor", vf.factor, "conformal factor f for the weighted and Weitzenboeck suites");
    verify->add_option("--out", verify_out, "write the report to this file");

    CLI::App* catalog = app.add_subcommand("catalog", "list built-in metrics");
    bool cat_json = false;
    std::optional<std::string> cat_name;
    std::string cat_out;
    catalog->add_flag("--json", cat_json, "machine-readable listing");
    catalog->add_option("--name", cat_name, "show one entry");
    catalog->add_option("--out", cat_out, "write the listing to this file");

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? Ok : InputFailure;
    }

    try {
        if (analyze->parsed()) return cmd_analyze(af, point, Output{out, af.out}, err);
        if (scan->parsed()) {
            if (!grid && !random) throw InputError("scan needs --grid or --random");
            return cmd_scan(af, grid, random, scan_seed, margin, strict, Output{out, af.out}, err);
        }
        if (verify->parsed()) return cmd_verify(vf, Output{out, verify_out});
        if (catalog->parsed()) return cmd_catalog(cat_json, cat_name, Output{out, cat_out});
    } catch (const ParseError& e) {
        err << "error: " << e.what() << " (at offset " << e.offset() << ")\n";
        return InputFailure;
    } catch (const InputError& e) {
        err << "error: " << e.what() << "\n";
        return InputFailure;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << "\n";
        return DomainFailure;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return InputFailure;
    }
    return InputFailure;
}

}  // namespace weylscope::cli
