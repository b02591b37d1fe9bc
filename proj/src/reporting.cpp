#include "pecurves/reporting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>

#include "pecurves/errors.hpp"

namespace pec {

using nlohmann::json;

namespace {

std::string g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string fixed(double x, int digits = 2) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.*f", digits, x);
    return buf;
}

// JSON has no infinity; non-finite numbers become null and come back as +inf.
json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

double num_from(const json& j) {
    return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

std::string join(const std::vector<std::string>& xs, char sep) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += sep;
        out += xs[i];
    }
    return out;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char ch : s) {
        switch (ch) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += ch;
        }
    }
    return out;
}

// 1-2-5 ticks covering [lo, hi].
std::vector<double> nice_ticks(double lo, double hi, int target = 6) {
    const double span = hi - lo;
    if (!(span > 0)) return {lo};
    const double raw = span / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
        step = m * mag;
        if (step >= raw) break;
    }
    std::vector<double> ticks;
    for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * span; t += step)
        ticks.push_back(std::abs(t) < 1e-12 * span ? 0.0 : t);
    return ticks;
}

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                "#8c564b", "#e377c2", "#17becf", "#7f7f7f", "#bcbd22"};

}  // namespace

bool RunReport::all_pass() const {
    return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

json to_json(const CriticalPointRecord& r) {
    return json{{"branch", to_string(r.branch)},
                {"k", r.k},
                {"c", r.c},
                {"lambda", num(r.lambda)},
                {"t_root", num(r.t_root)},
                {"u_norm", num(r.u_norm)},
                {"residual_grad", num(r.residual_grad)},
                {"energy_defect", num(r.energy_defect)},
                {"iterations", r.iterations},
                {"converged", r.converged},
                {"flags", r.flags}};
}

CriticalPointRecord record_from_json(const json& j) {
    CriticalPointRecord r;
    r.branch = parse_branch(j.at("branch").get<std::string>());
    r.k = j.at("k").get<int>();
    r.c = j.at("c").get<double>();
    r.lambda = num_from(j.at("lambda"));
    r.t_root = num_from(j.at("t_root"));
    r.u_norm = num_from(j.at("u_norm"));
    r.residual_grad = num_from(j.at("residual_grad"));
    r.energy_defect = num_from(j.at("energy_defect"));
    r.iterations = j.value("iterations", 0);
    r.converged = j.at("converged").get<bool>();
    r.flags = j.value("flags", std::vector<std::string>{});
    return r;
}

json to_json(const EnergyCurve& c) {
    json pts = json::array();
    for (const auto& p : c.points) {
        json jp = to_json(p.record);
        jp["c"] = p.c;
        jp["lambda"] = num(p.lambda);
        jp["k"] = p.k;
        jp["surrogate"] = p.surrogate;
        jp["flags"] = p.flags;
        pts.push_back(std::move(jp));
    }
    return json{{"label", c.label()},
                {"branch", to_string(c.branch)},
                {"k", c.k},
                {"negated_a", c.negated_a},
                {"monotone_decreasing", c.monotone_decreasing},
                {"nonincreasing", c.nonincreasing},
                {"max_successive_jump", num(c.max_successive_jump)},
                {"truncation_reason", c.truncation_reason},
                {"points", pts}};
}

EnergyCurve curve_from_json(const json& j) {
    EnergyCurve c;
    try {
        c.branch = parse_branch(j.at("branch").get<std::string>());
        c.k = j.at("k").get<int>();
        c.negated_a = j.value("negated_a", false);
        c.monotone_decreasing = j.value("monotone_decreasing", false);
        c.nonincreasing = j.value("nonincreasing", false);
        c.max_successive_jump = j.contains("max_successive_jump") ? num_from(j.at("max_successive_jump")) : 0.0;
        c.truncation_reason = j.value("truncation_reason", std::string{});
        for (const auto& jp : j.at("points")) {
            CurvePoint p;
            p.record = record_from_json(jp);
            p.branch = c.branch;
            p.k = p.record.k;
            p.c = p.record.c;
            p.lambda = p.record.lambda;
            p.surrogate = jp.value("surrogate", false);
            p.flags = p.record.flags;
            c.points.push_back(std::move(p));
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed curve in report: ") + e.what());
    }
    if (!c.points.empty()) {
        c.first_lambda = c.points.front().lambda;
        c.last_lambda = c.points.back().lambda;
    }
    return c;
}

json RunReport::to_json(bool with_timing) const {
    json j;
    j["command"] = command;
    j["config"] = config;
    j["c_star"] = c_star ? json(*c_star) : json(nullptr);
    j["c_star_star"] = c_star_star ? json(*c_star_star) : json(nullptr);
    json cs = json::array();
    for (const auto& c : curves) cs.push_back(pec::to_json(c));
    j["curves"] = cs;
    json vs = json::array();
    for (const auto& v : verdicts) vs.push_back({{"name", v.name}, {"pass", v.pass}, {"detail", v.detail}});
    j["verdicts"] = vs;
    j["all_pass"] = all_pass();
    j["details"] = details;
    if (with_timing) j["timing"] = {{"seconds", seconds}};
    return j;
}

RunReport RunReport::from_json(const json& j) {
    RunReport r;
    try {
        r.command = j.value("command", std::string{});
        r.config = j.value("config", json::object());
        if (j.contains("c_star") && !j.at("c_star").is_null()) r.c_star = j.at("c_star").get<double>();
        if (j.contains("c_star_star") && !j.at("c_star_star").is_null())
            r.c_star_star = j.at("c_star_star").get<double>();
        for (const auto& c : j.value("curves", json::array())) r.curves.push_back(curve_from_json(c));
        for (const auto& v : j.value("verdicts", json::array()))
            r.verdicts.push_back({v.at("name").get<std::string>(), v.at("pass").get<bool>(), v.value("detail", "")});
        r.details = j.value("details", json::object());
        if (j.contains("timing")) r.seconds = j.at("timing").value("seconds", 0.0);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed report: ") + e.what());
    }
    return r;
}

void write_curves_csv(std::ostream& os, const std::vector<EnergyCurve>& curves) {
    os << kCsvHeader << '\n';
    for (const auto& c : curves) {
        const std::string label = c.label();
        for (const auto& p : c.points) {
            const auto& r = p.record;
            os << label << ',' << p.k << ',' << g17(p.c) << ',' << g17(p.lambda) << ',' << g17(r.t_root) << ','
               << g17(r.u_norm) << ',' << g17(r.residual_grad) << ',' << g17(r.energy_defect) << ','
               << (r.converged ? "true" : "false") << ',' << csv_field(join(p.flags, ';')) << '\n';
        }
    }
}

std::string curves_csv(const std::vector<EnergyCurve>& curves) {
    std::ostringstream os;
    write_curves_csv(os, curves);
    return os.str();
}

std::string render_svg(const std::vector<EnergyCurve>& curves, std::optional<double> c_star,
                       std::optional<double> c_star_star, const std::string& title) {
    const double width = 760, height = 520;
    const double left = 80, right = 190, top = 40, bottom = 60;
    const double pw = width - left - right, ph = height - top - bottom;

    double lmin = std::numeric_limits<double>::infinity(), lmax = -lmin;
    double cmin = lmin, cmax = -lmin;
    for (const auto& c : curves)
        for (const auto& p : c.points) {
            if (!std::isfinite(p.lambda)) continue;
            lmin = std::min(lmin, p.lambda);
            lmax = std::max(lmax, p.lambda);
            cmin = std::min(cmin, p.c);
            cmax = std::max(cmax, p.c);
        }
    for (auto v : {c_star, c_star_star})
        if (v && std::isfinite(*v) && std::isfinite(cmin) && *v <= cmax + 0.5 * (cmax - cmin) &&
            *v >= cmin - 0.5 * (cmax - cmin)) {
            cmin = std::min(cmin, *v);
            cmax = std::max(cmax, *v);
        }
    if (!std::isfinite(lmin)) lmin = 0, lmax = 1, cmin = -1, cmax = 0;
    lmin = std::min(lmin, 0.0);
    if (lmax - lmin < 1e-12) lmax = lmin + 1.0;
    if (cmax - cmin < 1e-12) cmin -= 0.5, cmax += 0.5;
    const double lpad = 0.05 * (lmax - lmin), cpad = 0.05 * (cmax - cmin);
    lmin -= lpad, lmax += lpad, cmin -= cpad, cmax += cpad;

    auto X = [&](double lam) { return left + (lam - lmin) / (lmax - lmin) * pw; };
    auto Y = [&](double c) { return top + (cmax - c) / (cmax - cmin) * ph; };

    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s << "<text x=\"" << left + pw / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << xml_escape(title)
      << "</text>\n";

    s << "<g stroke=\"#dddddd\" stroke-width=\"1\">\n";
    const auto xt = nice_ticks(lmin, lmax), yt = nice_ticks(cmin, cmax);
    for (double t : xt) s << "<line x1=\"" << fixed(X(t)) << "\" y1=\"" << top << "\" x2=\"" << fixed(X(t)) << "\" y2=\"" << top + ph << "\"/>\n";
    for (double t : yt) s << "<line x1=\"" << left << "\" y1=\"" << fixed(Y(t)) << "\" x2=\"" << left + pw << "\" y2=\"" << fixed(Y(t)) << "\"/>\n";
    s << "</g>\n";
    s << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (double t : xt)
        s << "<text x=\"" << fixed(X(t)) << "\" y=\"" << top + ph + 16 << "\" text-anchor=\"middle\">" << tick_label(t)
          << "</text>\n";
    for (double t : yt)
        s << "<text x=\"" << left - 6 << "\" y=\"" << fixed(Y(t) + 4) << "\" text-anchor=\"end\">" << tick_label(t)
          << "</text>\n";
    s << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 18 << "\" text-anchor=\"middle\">lambda</text>\n";
    s << "<text x=\"18\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " << top + ph / 2
      << ")\">c</text>\n";
    if (lmin < 0 && lmax > 0)
        s << "<line x1=\"" << fixed(X(0)) << "\" y1=\"" << top << "\" x2=\"" << fixed(X(0)) << "\" y2=\"" << top + ph
          << "\" stroke=\"#888888\"/>\n";

    auto hline = [&](std::optional<double> v, const char* name) {
        if (!v || *v < cmin || *v > cmax) return;
        s << "<line class=\"threshold\" x1=\"" << left << "\" y1=\"" << fixed(Y(*v)) << "\" x2=\"" << left + pw
          << "\" y2=\"" << fixed(Y(*v)) << "\" stroke=\"#444444\" stroke-dasharray=\"6 4\"/>\n";
        s << "<text x=\"" << left + pw - 4 << "\" y=\"" << fixed(Y(*v) - 4) << "\" text-anchor=\"end\" fill=\"#444444\">"
          << name << " = " << tick_label(*v) << "</text>\n";
    };
    hline(c_star, "c*");
    hline(c_star_star, "c**");

    std::size_t idx = 0;
    double ly = top + 10;
    for (const auto& c : curves) {
        const char* color = kPalette[idx++ % (sizeof kPalette / sizeof kPalette[0])];
        const bool dashed = c.branch == Branch::Minus;
        std::ostringstream pts;
        for (const auto& p : c.points)
            if (std::isfinite(p.lambda)) pts << fixed(X(p.lambda)) << ',' << fixed(Y(p.c)) << ' ';
        const std::string name = c.label() + " k=" + std::to_string(c.k);
        s << "<polyline data-curve=\"" << xml_escape(name) << "\" fill=\"none\" stroke=\"" << color
          << "\" stroke-width=\"1.8\"" << (dashed ? " stroke-dasharray=\"8 3\"" : "") << " points=\"" << pts.str()
          << "\"/>\n";
        for (const auto& p : c.points)
            if (std::isfinite(p.lambda))
                s << "<circle cx=\"" << fixed(X(p.lambda)) << "\" cy=\"" << fixed(Y(p.c)) << "\" r=\"2.5\" fill=\""
                  << color << "\"/>\n";
        const double lx = left + pw + 16;
        s << "<line x1=\"" << lx << "\" y1=\"" << ly << "\" x2=\"" << lx + 24 << "\" y2=\"" << ly << "\" stroke=\""
          << color << "\" stroke-width=\"1.8\"" << (dashed ? " stroke-dasharray=\"8 3\"" : "") << "/>\n";
        s << "<text x=\"" << lx + 30 << "\" y=\"" << ly + 4 << "\">" << xml_escape(name) << "</text>\n";
        ly += 18;
    }
    s << "</svg>\n";
    return s.str();
}

}  // namespace pec
