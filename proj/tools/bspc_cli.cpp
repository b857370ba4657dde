#include "bspc/application.hpp"
#include "bspc/charts.hpp"
#include "bspc/config.hpp"
#include "bspc/dataset.hpp"
#include "bspc/diagnostics.hpp"
#include "bspc/error.hpp"
#include "bspc/mc.hpp"
#include "bspc/parallel.hpp"
#include "bspc/report.hpp"
#include "bspc/svg.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace bspc;

namespace {

struct CommonOptions {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    std::optional<double> alpha;
    std::optional<int> threads;
    bool serial = false;
};

struct DataOptions {
    std::string path;
    std::string format;
};

void add_common(CLI::App* cmd, CommonOptions& opt) {
    cmd->add_option("-c,--config", opt.config_path, "key = value config file, or a JSON report to re-run");
    cmd->add_option("-s,--set", opt.overrides, "override a config key (key=value), repeatable");
    cmd->add_option("-o,--out-dir", opt.out_dir, "directory for output files");
    cmd->add_option("--seed", opt.seed, "base random seed");
    cmd->add_option("--alpha", opt.alpha, "false-alarm probability per chart");
    cmd->add_option("--threads", opt.threads, "worker threads (0 = runtime default)");
    cmd->add_flag("--serial", opt.serial, "run replication work on the serial reference path");
}

void add_data(CLI::App* cmd, DataOptions& opt, bool required) {
    auto* o = cmd->add_option("-d,--data", opt.path, "input dataset");
    if (required) o->required();
    cmd->add_option("-f,--format", opt.format, "csv-wide | csv-long | labeled-tsv (overrides config 'format')");
}

KeyValueConfig resolve_config(const CommonOptions& opt, const DataOptions* data = nullptr) {
    KeyValueConfig cfg = opt.config_path.empty() ? KeyValueConfig{} : KeyValueConfig::load(opt.config_path);
    for (const auto& o : opt.overrides) cfg.apply_override(o);
    if (opt.seed) cfg.set("seed", std::to_string(*opt.seed));
    if (opt.alpha) cfg.set("alpha", format_double(*opt.alpha));
    if (opt.threads) cfg.set("threads", std::to_string(*opt.threads));
    if (data && !data->format.empty()) cfg.set("format", data->format);
    set_thread_count(static_cast<int>(cfg.get_int("threads")));
    return cfg;
}

Execution exec_of(const CommonOptions& opt) { return opt.serial ? Execution::Serial : Execution::Parallel; }

fs::path out_path(const CommonOptions& opt, const std::string& name) {
    fs::create_directories(opt.out_dir);
    return fs::path(opt.out_dir) / name;
}

Json envelope(const std::string& command, const KeyValueConfig& cfg) {
    Json doc;
    doc["command"] = command;
    Json c = Json::object();
    for (const auto& [k, v] : cfg.resolved()) c[k] = v;
    doc["config"] = c;
    doc["seed"] = cfg.get_uint("seed");
    return doc;
}

void write_json(const fs::path& path, const Json& doc) { write_text(path, doc.dump(2) + "\n"); }

Dataset load_data(const DataOptions& data, const KeyValueConfig& cfg) {
    return ingest(data.path, parse_format(cfg.get("format")));
}

std::vector<CoefEstimate> fit_all(const BatchSet& set, const ArmaShape& shape, std::size_t& failed,
                                  std::vector<std::vector<double>>& innovations) {
    std::vector<CoefEstimate> fits;
    failed = 0;
    for (const auto& b : set.batches) {
        try {
            fits.push_back(fit_ols(b, shape));
            innovations.push_back(filter_residuals(b.values, fits.back().coef, shape));
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::SingularFit && e.kind() != ErrorKind::InsufficientData) throw;
            ++failed;
        }
    }
    return fits;
}

int cmd_simulate(const CommonOptions& opt, const std::string& out_name) {
    const KeyValueConfig cfg = resolve_config(opt);
    const ArmaSpec spec = spec_from(cfg);
    spec.validate();
    const auto n = static_cast<std::size_t>(cfg.get_uint("batches"));
    const auto T = static_cast<std::size_t>(cfg.get_uint("length"));
    const auto burn = static_cast<std::size_t>(cfg.get_uint("burn_in"));
    const std::uint64_t seed = cfg.get_uint("seed");
    const std::string label = cfg.get("label");
    const std::string prefix = cfg.get("id_prefix");
    const DataFormat fmt = parse_format(cfg.get("format"));
    if (fmt == DataFormat::LabeledTsv && label.empty())
        throw Error(ErrorKind::Config, "labeled-tsv output needs a non-empty 'label'");

    BatchSet set;
    for (std::size_t i = 0; i < n; ++i) {
        BatchSeries b = simulate(spec, T, burn, splitmix64(seed + i));
        b.batch_id = prefix + std::to_string(i + 1);
        b.label = label;
        set.batches.push_back(std::move(b));
    }
    const fs::path data_path = out_path(opt, out_name);
    write_dataset(data_path, set, fmt);
    Json doc = envelope("simulate", cfg);
    doc["output"] = data_path.string();
    doc["manifest"] = to_json(ingest(data_path, fmt).manifest);
    write_json(out_path(opt, "simulate.json"), doc);
    std::cout << "wrote " << n << " batches of length " << T << " to " << data_path.string() << "\n";
    return 0;
}

int cmd_phase1(const CommonOptions& opt, const DataOptions& data) {
    const KeyValueConfig cfg = resolve_config(opt, &data);
    const ArmaShape shape = shape_from(cfg);
    const Dataset ds = load_data(data, cfg);
    BatchSet ref_set = ds.batches.has_labels() ? ds.batches.with_label(normalize_label(cfg.get("reference_label")))
                                               : ds.batches;
    if (ref_set.empty()) throw Error(ErrorKind::InsufficientReference, "no batches carry the reference label");
    const auto want = static_cast<std::size_t>(cfg.get_uint("reference_size"));
    if (want > 0 && want < ref_set.size()) {
        BatchSet picked;
        for (std::size_t i : sample_indices(ref_set.size(), want, cfg.get_uint("seed")))
            picked.batches.push_back(ref_set.batches[i]);
        ref_set = std::move(picked);
    }

    std::size_t failed = 0;
    std::vector<std::vector<double>> innovations;
    const std::vector<CoefEstimate> fits = fit_all(ref_set, shape, failed, innovations);
    if (fits.empty()) throw Error(ErrorKind::InsufficientReference, "no reference batch could be fitted");
    const double level = cfg.get_double("screen_level");
    const ScreeningResult screening = coef_significance_screen(fits, level, cfg.get_double("screen_threshold"));
    const ResidualAdequacy adequacy = residual_adequacy(innovations, shape.ar_order + shape.ma_order, level);
    const SubsetRule rule = SubsetRule::parse(cfg.get("subset"), shape);
    const PhaseIReference ref = estimate_reference(fits, resolve_subset(rule, shape, screening), rule.describe(shape));

    const fs::path ref_path = out_path(opt, "reference.txt");
    save_reference(ref_path, ref);
    Json doc = envelope("phase1", cfg);
    doc["manifest"] = to_json(ds.manifest);
    doc["reference_file"] = ref_path.string();
    doc["failed_fits"] = failed;
    doc["residual_adequacy"] = to_json(adequacy);
    doc["screening"] = to_json(screening, shape);
    doc["reference"] = reference_summary(ref);
    write_json(out_path(opt, "phase1.json"), doc);
    std::cout << "reference from " << ref.batch_count << " batches on " << ref.dim() << " coefficients ("
              << ref.provenance << "); Ljung-Box pass rate " << adequacy.white_rate << ", Shapiro-Wilk pass rate "
              << adequacy.normal_rate << "\n";
    return 0;
}

void print_signals(const ChartReport& report) {
    std::cout << "batches: " << report.records.size() << " (reference " << report.reference_batches << ")\n";
    std::cout << "T2 signals: " << report.signal_count_t2() << "\n";
    for (std::size_t j = 0; j < report.coef_names.size(); ++j) {
        std::size_t count = 0;
        for (const auto& r : report.records) count += r.monitorable && j < r.signals.t.size() && r.signals.t[j];
        std::cout << "t " << report.coef_names[j] << " signals: " << count << "\n";
    }
}

int cmd_monitor(const CommonOptions& opt, const DataOptions& data, const std::string& reference, bool svg) {
    const KeyValueConfig cfg = resolve_config(opt, &data);
    const double alpha = cfg.get_double("alpha");
    const double lambda = cfg.get_double("ewma_lambda");
    Json doc = envelope("monitor", cfg);
    ChartReport report;
    if (data.path.empty()) {
        const ArmaSpec spec = spec_from(cfg);
        const DisturbedParam param = DisturbedParam::parse(cfg.get("disturbed_param"));
        const ArmaSpec disturbed = param.apply(spec, cfg.get_double("shift_level"));
        report = diagnose_sequence(spec, disturbed, static_cast<std::size_t>(cfg.get_uint("batches")),
                                   static_cast<std::size_t>(cfg.get_uint("length")),
                                   static_cast<std::size_t>(cfg.get_uint("new_batches")), alpha,
                                   cfg.get_uint("seed"), lambda);
        doc["mode"] = "simulated";
    } else {
        if (reference.empty()) throw Error(ErrorKind::Config, "monitoring a dataset needs --reference");
        const PhaseIReference ref = load_reference(reference);
        const Dataset ds = load_data(data, cfg);
        report = monitor_batches(ref, ds.batches, alpha, lambda, exec_of(opt));
        doc["mode"] = "dataset";
        doc["manifest"] = to_json(ds.manifest);
        doc["reference_file"] = reference;
        if (ds.batches.has_labels()) {
            const std::string label = normalize_label(cfg.get("reference_label"));
            const LabelRates rates = evaluate_labels(ref, ds.batches.with_label(label), ds.batches.without_label(label),
                                                     alpha, exec_of(opt));
            doc["label_rates"] = Json{{"r0", rates.r0},
                                      {"r1", rates.r1},
                                      {"in_control_used", rates.in_control_used},
                                      {"out_of_control_used", rates.out_of_control_used},
                                      {"unmonitorable", rates.unmonitorable}};
        }
    }
    doc["report"] = to_json(report);
    write_json(out_path(opt, "report.json"), doc);
    if (svg) write_text(out_path(opt, "charts.svg"), render_chart_svg(report));
    print_signals(report);
    return 0;
}

int cmd_mc(const CommonOptions& opt) {
    const KeyValueConfig cfg = resolve_config(opt);
    const ScenarioSpec scenario = scenario_from(cfg);
    const RunSummary summary = run_study(scenario, exec_of(opt));
    const std::string table = summary_table(summary);
    write_text(out_path(opt, "summary.txt"), table);
    Json doc = envelope("mc", cfg);
    doc["summary"] = to_json(summary);
    write_json(out_path(opt, "summary.json"), doc);
    std::cout << table;
    return 0;
}

int cmd_apply(const CommonOptions& opt, const DataOptions& data) {
    const KeyValueConfig cfg = resolve_config(opt, &data);
    const Dataset ds = load_data(data, cfg);
    ApplicationConfig app;
    app.shape = shape_from(cfg);
    app.reference_label = normalize_label(cfg.get("reference_label"));
    app.subset = SubsetRule::parse(cfg.get("subset"), app.shape);
    app.screen_level = cfg.get_double("screen_level");
    app.screen_threshold = cfg.get_double("screen_threshold");
    app.sizes = cfg.get_sizes("apply_sizes");
    app.alphas = cfg.get_doubles("apply_alphas");
    app.replications = static_cast<std::size_t>(cfg.get_uint("apply_replications"));
    app.seed = cfg.get_uint("seed");
    const ApplicationResult result = run_application(ds.batches, app, exec_of(opt));

    const std::string table = application_table(result);
    write_text(out_path(opt, "apply.txt"), table);
    Json doc = envelope("apply", cfg);
    doc["manifest"] = to_json(ds.manifest);
    doc["screening"] = to_json(result.screening, app.shape);
    doc["result"] = to_json(result);
    write_json(out_path(opt, "apply.json"), doc);
    std::cout << table;
    return 0;
}

int report_error(const std::string& kind, const std::string& message, int code) {
    Json err{{"error", kind}, {"message", message}, {"exit_code", code}};
    std::cerr << err.dump() << "\n";
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Batch process monitoring with ARMA coefficient control charts"};
    app.require_subcommand(1);

    CommonOptions common;
    DataOptions data;
    std::string sim_out = "batches.csv";
    std::string reference;
    bool no_svg = false;

    auto* sim = app.add_subcommand("simulate", "write simulated batches of the configured ARMA process");
    add_common(sim, common);
    sim->add_option("--file", sim_out, "output file name inside --out-dir");

    auto* p1 = app.add_subcommand("phase1", "fit reference batches and write the Phase I reference");
    add_common(p1, common);
    add_data(p1, data, true);

    auto* mon = app.add_subcommand("monitor", "score batches against a reference (simulated run without --data)");
    add_common(mon, common);
    add_data(mon, data, false);
    mon->add_option("-r,--reference", reference, "reference file written by phase1");
    mon->add_flag("--no-svg", no_svg, "skip the chart SVG");

    auto* mc = app.add_subcommand("mc", "Monte Carlo ARL study over the configured grid");
    add_common(mc, common);

    auto* ap = app.add_subcommand("apply", "labeled-data pipeline: fit, screen, reference, r0/r1 grid");
    add_common(ap, common);
    add_data(ap, data, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return report_error("config", e.what(), 2);
    }

    try {
        if (*sim) return cmd_simulate(common, sim_out);
        if (*p1) return cmd_phase1(common, data);
        if (*mon) return cmd_monitor(common, data, reference, !no_svg);
        if (*mc) return cmd_mc(common);
        if (*ap) return cmd_apply(common, data);
    } catch (const Error& e) {
        return report_error(std::string(to_string(e.kind())), e.what(), exit_code(e.kind()));
    } catch (const fs::filesystem_error& e) {
        return report_error("format", e.what(), 3);
    } catch (const std::exception& e) {
        return report_error("internal", e.what(), 1);
    }
    return 0;
}
