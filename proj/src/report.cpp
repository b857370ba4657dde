#include "bspc/report.hpp"

#include "bspc/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

namespace bspc {

namespace {

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json arl_json(const ArlStat& s) { return Json{{"mean", s.mean}, {"std", s.std}, {"censored", s.censored}}; }

std::string fixed(double v, int digits = 2) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string pad(const std::string& s, std::size_t width) {
    return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

}  // namespace

Json to_json(const ChartRecord& rec, const std::vector<std::string>& names) {
    Json t = Json::object();
    Json ts = Json::object();
    for (std::size_t j = 0; j < names.size() && j < rec.t_scores.size(); ++j) {
        t[names[j]] = number_or_null(rec.t_scores[j]);
        ts[names[j]] = rec.signals.t.size() > j && rec.signals.t[j];
    }
    Json out;
    out["batch_id"] = rec.batch_id;
    out["monitorable"] = rec.monitorable;
    if (!rec.monitorable) out["failure"] = rec.failure;
    out["t2_score"] = number_or_null(rec.t2_score);
    out["t2_limit"] = rec.t2_limit;
    out["t_scores"] = t;
    out["t_limit"] = rec.t_limit;
    out["resid_mean_score"] = number_or_null(rec.resid_mean_score);
    out["resid_limit"] = rec.resid_limit;
    out["ewma_score"] = number_or_null(rec.ewma_score);
    out["ewma_limit"] = rec.ewma_limit;
    out["signals"] = Json{{"t2", rec.signals.t2}, {"t", ts}, {"residual", rec.signals.residual}, {"ewma", rec.signals.ewma}};
    return out;
}

Json to_json(const ChartReport& report) {
    Json out;
    out["coefficients"] = report.coef_names;
    out["alpha"] = report.alpha;
    out["ewma_lambda"] = report.lambda;
    out["reference_batches"] = report.reference_batches;
    std::size_t t2 = 0, res = 0, ewma = 0, bad = 0;
    std::vector<std::size_t> per_coef(report.coef_names.size(), 0);
    Json records = Json::array();
    for (const auto& r : report.records) {
        records.push_back(to_json(r, report.coef_names));
        if (!r.monitorable) {
            ++bad;
            continue;
        }
        t2 += r.signals.t2;
        res += r.signals.residual;
        ewma += r.signals.ewma;
        for (std::size_t j = 0; j < per_coef.size() && j < r.signals.t.size(); ++j) per_coef[j] += r.signals.t[j];
    }
    Json tcount = Json::object();
    for (std::size_t j = 0; j < per_coef.size(); ++j) tcount[report.coef_names[j]] = per_coef[j];
    out["signal_counts"] = Json{{"t2", t2}, {"t", tcount}, {"residual", res}, {"ewma", ewma}, {"unmonitorable", bad}};
    out["records"] = std::move(records);
    return out;
}

Json to_json(const CellRecord& cell) {
    Json out;
    out["level"] = cell.level;
    out["I"] = cell.I;
    out["T"] = cell.T;
    out["valid"] = cell.valid;
    if (!cell.valid) out["invalid_reason"] = cell.invalid_reason;
    out["t2"] = arl_json(cell.t2);
    out["residual"] = arl_json(cell.residual);
    out["ewma"] = arl_json(cell.ewma);
    out["replications_used"] = cell.replications_used;
    out["dropped_replications"] = cell.dropped_replications;
    out["failed_fits"] = cell.failed_fits;
    return out;
}

Json to_json(const RunSummary& summary) {
    Json cells = Json::array();
    for (const auto& c : summary.cells) cells.push_back(to_json(c));
    return Json{{"disturbed_param", summary.scenario.disturbed.name()},
                {"alpha", summary.scenario.alpha},
                {"phase2_batches", summary.scenario.phase2_batches},
                {"replications", summary.scenario.replications},
                {"censored_total", summary.censored_total()},
                {"cells", cells}};
}

Json to_json(const DatasetManifest& m) {
    Json labels = Json::object();
    for (const auto& [k, v] : m.label_counts) labels[k] = v;
    return Json{{"source", m.source},           {"format", std::string(to_string(m.format))},
                {"has_labels", m.has_labels},   {"batch_count", m.batch_count},
                {"series_length", m.series_length}, {"checksum", m.checksum},
                {"label_counts", labels}};
}

Json to_json(const ScreeningResult& s, const ArmaShape& shape) {
    const auto names = shape.coef_names();
    Json rates = Json::object();
    for (std::size_t j = 0; j < s.rates.size() && j < names.size(); ++j) rates[names[j]] = s.rates[j];
    Json retained = Json::array();
    for (std::size_t i : s.retained) retained.push_back(names.at(i));
    return Json{{"level", s.level}, {"threshold", s.threshold}, {"rates", rates}, {"retained", retained}};
}

Json to_json(const ResidualAdequacy& a) {
    return Json{{"batches", a.batches}, {"ljung_box_pass_rate", a.white_rate}, {"shapiro_wilk_pass_rate", a.normal_rate}};
}

Json to_json(const ApplicationResult& r) {
    Json cells = Json::array();
    for (const auto& c : r.cells)
        cells.push_back(Json{{"I", c.I},
                             {"alpha", c.alpha},
                             {"r0", Json{{"mean", c.r0.mean}, {"std", c.r0.std}}},
                             {"r1", Json{{"mean", c.r1.mean}, {"std", c.r1.std}}},
                             {"replications_used", c.replications_used}});
    return Json{{"reference_batches", r.reference_batches},
                {"other_batches", r.other_batches},
                {"failed_fits", r.failed_fits},
                {"residual_adequacy", to_json(r.adequacy)},
                {"monitored", r.monitored_names},
                {"skipped_sizes", r.skipped_sizes},
                {"cells", cells}};
}

Json reference_summary(const PhaseIReference& ref) {
    Json s = Json::array();
    for (Eigen::Index i = 0; i < ref.s_beta.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < ref.s_beta.cols(); ++j) row.push_back(ref.s_beta(i, j));
        s.push_back(row);
    }
    return Json{{"ar_order", ref.shape.ar_order}, {"ma_order", ref.shape.ma_order}, {"intercept", ref.shape.intercept},
                {"batch_count", ref.batch_count},  {"coefficients", ref.coef_names()}, {"beta_bar", ref.beta_bar},
                {"s_beta", s},                     {"sigma2_pool", ref.sigma2_pool},   {"provenance", ref.provenance}};
}

std::string serialize_reference(const PhaseIReference& ref) {
    std::ostringstream out;
    auto list = [&](const std::vector<double>& xs) {
        for (double x : xs) out << ' ' << format_double(x);
        out << '\n';
    };
    out << "bspc-reference 1\n";
    out << "shape " << ref.shape.ar_order << ' ' << ref.shape.ma_order << ' ' << (ref.shape.intercept ? 1 : 0) << '\n';
    out << "batch_count " << ref.batch_count << '\n';
    out << "indices";
    for (std::size_t i : ref.indices) out << ' ' << i;
    out << '\n';
    out << "provenance " << ref.provenance << '\n';
    out << "sigma2_pool " << format_double(ref.sigma2_pool) << '\n';
    out << "beta_bar";
    list(ref.beta_bar);
    for (Eigen::Index i = 0; i < ref.s_beta.rows(); ++i) {
        out << "s_beta";
        for (Eigen::Index j = 0; j < ref.s_beta.cols(); ++j) out << ' ' << format_double(ref.s_beta(i, j));
        out << '\n';
    }
    for (const auto& e : ref.estimates) {
        out << "estimate";
        list(e);
    }
    out << "end\n";
    return out.str();
}

PhaseIReference parse_reference(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    auto fail = [](const std::string& why) { return Error(ErrorKind::Format, "reference file: " + why); };
    if (!std::getline(in, line) || line != "bspc-reference 1") throw fail("missing 'bspc-reference 1' header");

    ArmaShape shape;
    std::size_t batch_count = 0;
    std::vector<std::size_t> indices;
    std::string provenance = "all";
    double sigma2_pool = 0.0;
    std::vector<std::vector<double>> estimates;
    bool have_shape = false, ended = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::string tag;
        fields >> tag;
        auto doubles = [&]() {
            std::vector<double> xs;
            std::string tok;
            while (fields >> tok) {
                try {
                    std::size_t used = 0;
                    xs.push_back(std::stod(tok, &used));
                    if (used != tok.size()) throw std::invalid_argument(tok);
                } catch (const std::exception&) {
                    throw fail("bad number '" + tok + "' in " + tag);
                }
            }
            return xs;
        };
        if (tag == "shape") {
            int icpt = 1;
            if (!(fields >> shape.ar_order >> shape.ma_order >> icpt)) throw fail("bad shape line");
            shape.intercept = icpt != 0;
            have_shape = true;
        } else if (tag == "batch_count") {
            fields >> batch_count;
        } else if (tag == "indices") {
            std::size_t i;
            while (fields >> i) indices.push_back(i);
        } else if (tag == "provenance") {
            std::getline(fields >> std::ws, provenance);
        } else if (tag == "sigma2_pool") {
            const auto xs = doubles();
            if (xs.size() != 1) throw fail("bad sigma2_pool");
            sigma2_pool = xs[0];
        } else if (tag == "estimate") {
            estimates.push_back(doubles());
        } else if (tag == "beta_bar" || tag == "s_beta") {
            // Derived from the estimates on load.
        } else if (tag == "end") {
            ended = true;
            break;
        } else {
            throw fail("unknown field '" + tag + "'");
        }
    }
    if (!have_shape || !ended) throw fail("truncated file");
    if (estimates.size() != batch_count) throw fail("batch_count does not match the stored estimates");
    return make_reference(shape, std::move(estimates), sigma2_pool, std::move(indices), std::move(provenance));
}

void save_reference(const std::filesystem::path& path, const PhaseIReference& ref) {
    write_text(path, serialize_reference(ref));
}

PhaseIReference load_reference(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Format, "cannot open reference file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_reference(buf.str());
}

std::string summary_table(const RunSummary& summary) {
    const auto& sc = summary.scenario;
    std::map<std::tuple<double, std::size_t, std::size_t>, const CellRecord*> lookup;
    for (const auto& c : summary.cells) lookup[{c.level, c.I, c.T}] = &c;

    std::ostringstream out;
    const std::string param = sc.disturbed.name();
    out << "ARMA(" << sc.in_control.phi.size() << "," << sc.in_control.theta.size() << "): mean and sd of ARL, disturbances in "
        << param << " (in-control " << format_double(sc.disturbed.current(sc.in_control)) << "), alpha = "
        << format_double(sc.alpha) << ", " << sc.replications << " replications, " << sc.phase2_batches
        << " phase II batches\n";

    auto block = [&](const char* title, const ArlStat CellRecord::*first, const ArlStat CellRecord::*second,
                     const char* first_name, const char* second_name) {
        out << "\n" << title << "\n";
        out << pad(param, 8) << pad("n", 6);
        for (std::size_t I : sc.I_grid) {
            const std::string tag = " I=" + std::to_string(I);
            out << " |" << pad(std::string(first_name) + "(mu)" + tag, 18) << pad(std::string(first_name) + "(sd)", 10)
                << pad(std::string(second_name) + "(mu)", 10) << pad(std::string(second_name) + "(sd)", 10);
        }
        out << "\n";
        for (double level : sc.levels) {
            bool first_row = true;
            for (std::size_t T : sc.T_grid) {
                out << pad(first_row ? fixed(level, 2) : "", 8) << pad(std::to_string(T), 6);
                first_row = false;
                for (std::size_t I : sc.I_grid) {
                    const auto it = lookup.find({level, I, T});
                    if (it == lookup.end() || !it->second->valid) {
                        out << " |" << pad("invalid", 18) << pad("-", 10) << pad("-", 10) << pad("-", 10);
                        continue;
                    }
                    const CellRecord& c = *it->second;
                    out << " |" << pad(fixed((c.*first).mean), 18) << pad(fixed((c.*first).std), 10)
                        << pad(fixed((c.*second).mean), 10) << pad(fixed((c.*second).std), 10);
                }
                out << "\n";
            }
        }
    };
    block("T2_beta and residual-mean t_e charts", &CellRecord::t2, &CellRecord::residual, "T2", "te");
    block("T2_beta and EWMA of residual-mean charts", &CellRecord::t2, &CellRecord::ewma, "T2", "ewma");
    out << "\ncensored ARL values (no signal in a replication): " << summary.censored_total() << "\n";
    return out.str();
}

std::string application_table(const ApplicationResult& r) {
    std::vector<double> alphas;
    std::vector<std::size_t> sizes;
    for (const auto& c : r.cells) {
        if (std::find(alphas.begin(), alphas.end(), c.alpha) == alphas.end()) alphas.push_back(c.alpha);
        if (std::find(sizes.begin(), sizes.end(), c.I) == sizes.end()) sizes.push_back(c.I);
    }
    auto find = [&](std::size_t I, double a) -> const ApplicationCell* {
        for (const auto& c : r.cells)
            if (c.I == I && c.alpha == a) return &c;
        return nullptr;
    };
    std::ostringstream out;
    out << "T2_beta chart on ";
    for (std::size_t i = 0; i < r.monitored_names.size(); ++i) out << (i ? "," : "") << r.monitored_names[i];
    out << ": mean and sd of r0 (held-out reference batches) and r1 (other batches)\n";
    for (const char* phase : {"r0", "r1"}) {
        out << "\n" << pad(phase, 4) << pad("I", 6);
        for (double a : alphas) out << " |" << pad("alpha=" + fixed(a, 2) + " mu", 16) << pad("sd", 8);
        out << "\n";
        for (std::size_t I : sizes) {
            out << pad("", 4) << pad(std::to_string(I), 6);
            for (double a : alphas) {
                const ApplicationCell* c = find(I, a);
                const RateStat& s = std::string(phase) == "r0" ? c->r0 : c->r1;
                out << " |" << pad(fixed(s.mean), 16) << pad(fixed(s.std), 8);
            }
            out << "\n";
        }
    }
    return out.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Format, "cannot write '" + path.string() + "'");
    out << text;
}

}  // namespace bspc
