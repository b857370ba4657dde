#include "bspc/application.hpp"

#include "bspc/error.hpp"
#include "bspc/mc.hpp"
#include "bspc/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>

namespace bspc {

SubsetRule SubsetRule::parse(const std::string& text, const ArmaShape& shape) {
    SubsetRule rule;
    if (text == "all" || text.empty()) return rule;
    if (text == "screened") {
        rule.kind = Kind::Screened;
        return rule;
    }
    rule.kind = Kind::Explicit;
    const auto names = shape.coef_names();
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        const auto it = std::find(names.begin(), names.end(), item);
        if (it == names.end()) throw Error(ErrorKind::Config, "subset names unknown coefficient '" + item + "'");
        rule.indices.push_back(static_cast<std::size_t>(it - names.begin()));
    }
    if (rule.indices.empty()) throw Error(ErrorKind::Config, "explicit subset is empty");
    return rule;
}

std::string SubsetRule::describe(const ArmaShape& shape) const {
    switch (kind) {
        case Kind::All: return "all";
        case Kind::Screened: return "screened";
        case Kind::Explicit: {
            const auto names = shape.coef_names();
            std::string out;
            for (std::size_t i : indices) out += (out.empty() ? "" : ",") + names.at(i);
            return out;
        }
    }
    return "all";
}

std::vector<std::size_t> resolve_subset(const SubsetRule& rule, const ArmaShape& shape, const ScreeningResult& screening) {
    switch (rule.kind) {
        case SubsetRule::Kind::All: {
            std::vector<std::size_t> all(shape.dim());
            std::iota(all.begin(), all.end(), std::size_t{0});
            return all;
        }
        case SubsetRule::Kind::Screened:
            if (screening.retained.empty())
                throw Error(ErrorKind::DegenerateReference, "coefficient screening retained no coefficient");
            return screening.retained;
        case SubsetRule::Kind::Explicit: return rule.indices;
    }
    return {};
}

std::vector<std::size_t> sample_indices(std::size_t n, std::size_t count, std::uint64_t seed) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    // Partial Fisher-Yates with an explicit modulo draw keeps the sample toolchain independent.
    for (std::size_t i = 0; i < count && i + 1 < n; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng() % (n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(count);
    return idx;
}

namespace {

RateStat mean_std(const std::vector<double>& xs) {
    RateStat s;
    if (xs.empty()) return s;
    s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - s.mean) * (x - s.mean);
        s.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    }
    return s;
}

}  // namespace

ApplicationResult run_application(const BatchSet& data, const ApplicationConfig& cfg, Execution exec) {
    const BatchSet in_control = data.with_label(cfg.reference_label);
    const BatchSet others = data.without_label(cfg.reference_label);
    if (in_control.empty()) throw Error(ErrorKind::InsufficientData, "no batch carries the reference label '" + cfg.reference_label + "'");
    if (others.empty()) throw Error(ErrorKind::InsufficientData, "no batch outside the reference label");

    auto fit_all = [&](const BatchSet& set) {
        std::vector<std::optional<CoefEstimate>> fits(set.size());
        parallel_for(set.size(), exec, [&](std::size_t i) {
            try {
                fits[i] = fit_ols(set.batches[i], cfg.shape);
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::SingularFit && e.kind() != ErrorKind::InsufficientData) throw;
            }
        });
        return fits;
    };
    ApplicationResult out;
    std::vector<CoefEstimate> ref_fits;
    std::vector<std::vector<double>> ref_innovations;
    std::vector<std::vector<double>> other_coefs;
    auto in_fits = fit_all(in_control);
    for (std::size_t i = 0; i < in_fits.size(); ++i) {
        if (!in_fits[i]) {
            ++out.failed_fits;
            continue;
        }
        ref_innovations.push_back(filter_residuals(in_control.batches[i].values, in_fits[i]->coef, cfg.shape));
        ref_fits.push_back(std::move(*in_fits[i]));
    }
    for (auto& f : fit_all(others)) {
        if (f)
            other_coefs.push_back(std::move(f->coef));
        else
            ++out.failed_fits;
    }
    out.reference_batches = ref_fits.size();
    out.other_batches = other_coefs.size();
    if (ref_fits.empty() || other_coefs.empty()) throw Error(ErrorKind::InsufficientData, "no batch could be fitted");

    out.adequacy = residual_adequacy(ref_innovations, cfg.shape.ar_order + cfg.shape.ma_order, cfg.screen_level);
    out.screening = coef_significance_screen(ref_fits, cfg.screen_level, cfg.screen_threshold);
    out.monitored = resolve_subset(cfg.subset, cfg.shape, out.screening);
    const auto names = cfg.shape.coef_names();
    for (std::size_t i : out.monitored) out.monitored_names.push_back(names.at(i));

    std::vector<std::vector<double>> ref_coefs;
    std::vector<double> ref_sigma2;
    for (const auto& f : ref_fits) {
        ref_coefs.push_back(f.coef);
        ref_sigma2.push_back(f.sigma2_hat);
    }

    const std::size_t p = out.monitored.size();
    for (std::size_t I : cfg.sizes) {
        if (I < p + 2 || I >= ref_coefs.size()) {
            out.skipped_sizes.push_back(I);
            continue;
        }
        // [replication][alpha] -> (r0, r1); NaN marks a dropped replication.
        std::vector<std::vector<std::pair<double, double>>> rates(cfg.replications);
        parallel_for(cfg.replications, exec, [&](std::size_t r) {
            const auto picked = sample_indices(ref_coefs.size(), I, splitmix64(cfg.seed ^ splitmix64(I)) + r);
            std::vector<bool> in_ref(ref_coefs.size(), false);
            std::vector<std::vector<double>> est;
            double pool = 0.0;
            for (std::size_t k : picked) {
                in_ref[k] = true;
                est.push_back(ref_coefs[k]);
                pool += ref_sigma2[k];
            }
            std::vector<std::vector<double>> held_out;
            for (std::size_t k = 0; k < ref_coefs.size(); ++k)
                if (!in_ref[k]) held_out.push_back(ref_coefs[k]);
            rates[r].assign(cfg.alphas.size(), {std::nan(""), std::nan("")});
            try {
                const PhaseIReference ref = make_reference(cfg.shape, std::move(est), pool / static_cast<double>(I),
                                                           out.monitored, cfg.subset.describe(cfg.shape));
                for (std::size_t a = 0; a < cfg.alphas.size(); ++a) {
                    const LabelRates lr = evaluate_label_coefs(ref, held_out, other_coefs, cfg.alphas[a]);
                    rates[r][a] = {lr.r0, lr.r1};
                }
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::DegenerateReference && e.kind() != ErrorKind::InsufficientReference) throw;
            }
        });
        for (std::size_t a = 0; a < cfg.alphas.size(); ++a) {
            std::vector<double> r0, r1;
            for (const auto& rep : rates) {
                if (std::isnan(rep[a].first)) continue;
                r0.push_back(rep[a].first);
                r1.push_back(rep[a].second);
            }
            ApplicationCell cell;
            cell.I = I;
            cell.alpha = cfg.alphas[a];
            cell.r0 = mean_std(r0);
            cell.r1 = mean_std(r1);
            cell.replications_used = r0.size();
            out.cells.push_back(cell);
        }
    }
    return out;
}

}  // namespace bspc
