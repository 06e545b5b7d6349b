#pragma once

// Reports over run artifacts: bootstrap confidence intervals, main and
// per-tier tables, error-tag histograms, win/loss panels and bar charts.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "shapecode/evaluator.hpp"
#include "shapecode/image_io.hpp"
#include "shapecode/parser.hpp"
#include "shapecode/prng.hpp"
#include "shapecode/runner.hpp"
#include "shapecode/stats.hpp"

namespace shapecode {

struct BootstrapOptions {
    int resamples = 1000;
    double level = 0.95;
    std::uint64_t seed = 0;
};

struct ConfidenceInterval {
    double mean = 0;
    double lo = 0;
    double hi = 0;
};

/// Percentile bootstrap of the mean. Endpoints are nearest-rank percentiles
/// of the sorted resample means, widened if needed so they bracket the mean.
inline ConfidenceInterval bootstrap_ci(std::span<const double> values, const BootstrapOptions& opt = {}) {
    if (values.empty()) throw std::invalid_argument("bootstrap_ci: empty input");
    if (opt.resamples < 1) throw std::invalid_argument("bootstrap_ci: resamples must be positive");
    FixedSum all;
    for (double v : values) all.add(v);

    Prng rng(opt.seed);
    const auto n = static_cast<std::int64_t>(values.size());
    std::vector<double> means(static_cast<std::size_t>(opt.resamples));
    for (double& m : means) {
        FixedSum s;
        for (std::int64_t i = 0; i < n; ++i) s.add(values[static_cast<std::size_t>(rng.uniform_int(0, n - 1))]);
        m = s.mean();
    }
    std::sort(means.begin(), means.end());
    const double tail = (1.0 - opt.level) / 2.0;
    auto nearest_rank = [&](double p) {
        const auto b = static_cast<double>(means.size());
        const auto rank = static_cast<std::size_t>(std::ceil(p * b - 1e-9));
        return means[std::clamp<std::size_t>(rank, 1, means.size()) - 1];
    };
    ConfidenceInterval ci{all.mean(), nearest_rank(tail), nearest_rank(1.0 - tail)};
    ci.lo = std::min(ci.lo, ci.mean);
    ci.hi = std::max(ci.hi, ci.mean);
    return ci;
}

struct MetricSummary {
    std::string metric;
    std::string stratum;  // "overall" or a tier name
    std::size_t n = 0;
    double mean = 0;
    double ci_low = 0;
    double ci_high = 0;
    FixedSum sum;  // exact numerator of `mean`
};

inline std::vector<double> metric_values(const std::vector<SampleRun>& records, std::string_view metric,
                                         std::string_view tier = {}) {
    std::vector<double> out;
    for (const auto& r : records)
        if (tier.empty() || r.difficulty == tier) out.push_back(metric_value(r.eval, metric));
    return out;
}

/// Mean and CI per metric, overall then per tier.
inline std::vector<MetricSummary> summarize_run(const RunArtifact& art, const BootstrapOptions& opt = {}) {
    if (art.records.empty()) throw RunError("run " + art.run_id + " has no per-sample records");
    if (art.run_config.contains("split")) {
        const auto expected = art.run_config["split"].value("samples", art.records.size());
        if (expected != art.records.size())
            throw RunError("run " + art.run_id + " is missing records (" + std::to_string(art.records.size()) + " of " +
                           std::to_string(expected) + ")");
    }
    std::vector<std::string> strata{"overall"};
    for (auto& t : tiers_of(art.records)) strata.push_back(t);

    std::vector<MetricSummary> rows;
    for (const auto& stratum : strata) {
        for (std::string_view metric : kMetricNames) {
            const auto vals = metric_values(art.records, metric, stratum == "overall" ? std::string_view{} : stratum);
            const ConfidenceInterval ci = bootstrap_ci(vals, opt);
            MetricSummary m{std::string(metric), stratum, vals.size(), ci.mean, ci.lo, ci.hi, {}};
            for (double v : vals) m.sum.add(v);
            rows.push_back(std::move(m));
        }
    }
    return rows;
}

/// Display label per run: adapter name, or adapter name plus run id when two
/// runs share an adapter.
inline std::vector<std::string> run_labels(const std::vector<RunArtifact>& runs) {
    std::map<std::string, int> count;
    auto adapter_of = [](const RunArtifact& a) { return a.run_config.at("adapter").at("name").get<std::string>(); };
    for (const auto& r : runs) ++count[adapter_of(r)];
    std::vector<std::string> labels;
    for (const auto& r : runs)
        labels.push_back(count[adapter_of(r)] > 1 ? adapter_of(r) + " (" + r.run_id + ")" : adapter_of(r));
    return labels;
}

inline std::string fmt_fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

inline std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + "\"";
}

inline std::string summary_csv(const std::vector<std::string>& labels,
                               const std::vector<std::vector<MetricSummary>>& tables) {
    std::string out = "run,stratum,metric,n,mean,ci_low,ci_high\n";
    for (std::size_t i = 0; i < tables.size(); ++i)
        for (const auto& m : tables[i])
            out += csv_field(labels[i]) + "," + m.stratum + "," + m.metric + "," + std::to_string(m.n) + "," +
                   fmt_fixed(m.mean, 6) + "," + fmt_fixed(m.ci_low, 6) + "," + fmt_fixed(m.ci_high, 6) + "\n";
    return out;
}

inline const MetricSummary& find_summary(const std::vector<MetricSummary>& rows, std::string_view stratum,
                                         std::string_view metric) {
    for (const auto& r : rows)
        if (r.stratum == stratum && r.metric == metric) return r;
    throw std::out_of_range("no summary for " + std::string(stratum) + "/" + std::string(metric));
}

inline std::string cell(const MetricSummary& m) {
    return fmt_fixed(m.mean, 3) + " [" + fmt_fixed(m.ci_low, 3) + ", " + fmt_fixed(m.ci_high, 3) + "]";
}

/// Markdown tables: overall results per run, then per-tier breakdowns.
inline std::string summary_markdown(const std::vector<std::string>& labels,
                                    const std::vector<std::vector<MetricSummary>>& tables,
                                    const BootstrapOptions& opt) {
    std::ostringstream md;
    md << "Bootstrap: " << opt.resamples << " resamples, " << fmt_fixed(opt.level * 100, 0)
       << "% percentile CI (nearest rank), seed " << opt.seed << ".\n\n";
    md << "| Model | Exact | PixAcc | FG-IoU | Parse | Exec |\n";
    md << "|---|---|---|---|---|---|\n";
    for (std::size_t i = 0; i < tables.size(); ++i) {
        md << "| " << labels[i];
        for (std::string_view m : kMetricNames) md << " | " << cell(find_summary(tables[i], "overall", m));
        md << " |\n";
    }
    md << "\n| Model | Tier | n | Exact | PixAcc | FG-IoU | Parse | Exec |\n";
    md << "|---|---|---|---|---|---|---|---|\n";
    for (std::size_t i = 0; i < tables.size(); ++i) {
        for (const auto& row : tables[i]) {
            if (row.stratum == "overall" || row.metric != kMetricNames[0]) continue;
            md << "| " << labels[i] << " | " << row.stratum << " | " << row.n;
            for (std::string_view m : kMetricNames) md << " | " << cell(find_summary(tables[i], row.stratum, m));
            md << " |\n";
        }
    }
    return md.str();
}

using TagHistogram = std::map<std::string, std::size_t>;

/// Error-tag counts per run; "none" counts clean samples.
inline std::vector<TagHistogram> error_histogram(const std::vector<RunArtifact>& runs) {
    std::vector<TagHistogram> out;
    for (const auto& run : runs) {
        TagHistogram h;
        for (const auto& r : run.records) ++h[error_key(r.eval)];
        out.push_back(std::move(h));
    }
    return out;
}

inline std::string histogram_csv(const std::vector<std::string>& labels, const std::vector<TagHistogram>& hists) {
    std::string out = "run,error_tag,count\n";
    for (std::size_t i = 0; i < hists.size(); ++i)
        for (const auto& [tag, n] : hists[i]) out += csv_field(labels[i]) + "," + tag + "," + std::to_string(n) + "\n";
    return out;
}

struct PanelRow {
    std::string sample_id;
    std::string kind;  // "win" or "loss"
    int rank = 0;
    int exact_match = 0;
    double fg_iou = 0;
};

/// Picks wins by (exact desc, fg_iou desc) and losses by fg_iou asc, ties by
/// sample_id. Counts are clamped to the number of records.
inline std::vector<PanelRow> select_panel_rows(const RunArtifact& art, std::size_t k_wins, std::size_t k_losses) {
    std::vector<const SampleRun*> recs;
    for (const auto& r : art.records) recs.push_back(&r);
    std::vector<PanelRow> rows;
    auto emit = [&](std::string_view kind, std::size_t k) {
        for (std::size_t i = 0; i < std::min(k, recs.size()); ++i)
            rows.push_back({recs[i]->sample_id, std::string(kind), static_cast<int>(i + 1), recs[i]->eval.exact_match,
                            recs[i]->eval.fg_iou});
    };
    std::stable_sort(recs.begin(), recs.end(), [](const SampleRun* a, const SampleRun* b) {
        if (a->eval.exact_match != b->eval.exact_match) return a->eval.exact_match > b->eval.exact_match;
        if (a->eval.fg_iou != b->eval.fg_iou) return a->eval.fg_iou > b->eval.fg_iou;
        return a->sample_id < b->sample_id;
    });
    emit("win", k_wins);
    std::stable_sort(recs.begin(), recs.end(), [](const SampleRun* a, const SampleRun* b) {
        if (a->eval.fg_iou != b->eval.fg_iou) return a->eval.fg_iou < b->eval.fg_iou;
        return a->sample_id < b->sample_id;
    });
    emit("loss", k_losses);
    return rows;
}

/// Writes target / re-rendered prediction / XOR diff PNGs per selected row
/// plus index.csv. Returns the PNG paths written.
inline std::vector<fs::path> qualitative_panel(const RunArtifact& art, std::size_t k_wins, std::size_t k_losses,
                                               const fs::path& out_dir,
                                               std::optional<fs::path> dataset_dir = std::nullopt) {
    const fs::path data = dataset_dir ? *dataset_dir : fs::path(art.run_config.at("split").at("dir").get<std::string>());
    fs::create_directories(out_dir);
    std::map<std::string, const SampleRun*> by_id;
    for (const auto& r : art.records) by_id[r.sample_id] = &r;

    std::vector<fs::path> written;
    std::string index = "kind,rank,sample_id,difficulty,exact_match,fg_iou,target,prediction,xor_diff\n";
    for (const PanelRow& row : select_panel_rows(art, k_wins, k_losses)) {
        const SampleRun& rec = *by_id.at(row.sample_id);
        const RasterImage target = read_png(data / (row.sample_id + ".png"));
        const ParseResult parsed = parse(rec.normalized_prediction);
        const RasterImage pred = parsed ? render(*parsed) : RasterImage(kBackground);
        const std::string stem = row.kind + "_" + std::to_string(row.rank) + "_" + row.sample_id;
        const fs::path files[3] = {out_dir / (stem + "_target.png"), out_dir / (stem + "_prediction.png"),
                                   out_dir / (stem + "_xor.png")};
        write_png(target, files[0]);
        write_png(pred, files[1]);
        write_png(xor_diff(target, pred), files[2]);
        written.insert(written.end(), std::begin(files), std::end(files));
        index += row.kind + "," + std::to_string(row.rank) + "," + row.sample_id + "," + rec.difficulty + "," +
                 std::to_string(row.exact_match) + "," + fmt_fixed(row.fg_iou, 6) + "," + files[0].filename().string() +
                 "," + files[1].filename().string() + "," + files[2].filename().string() + "\n";
    }
    write_text_file(out_dir / "index.csv", index);
    return written;
}

struct ChartBar {
    std::string run;
    std::string tier;
    double mean = 0;
    double ci_low = 0;
    double ci_high = 0;
};

inline std::vector<ChartBar> chart_data(const std::vector<std::string>& labels,
                                        const std::vector<std::vector<MetricSummary>>& tables, std::string_view metric) {
    if (std::find(std::begin(kMetricNames), std::end(kMetricNames), metric) == std::end(kMetricNames))
        throw std::invalid_argument("unknown metric '" + std::string(metric) + "'");
    std::vector<std::string> tiers;
    for (const auto& t : tables)
        for (const auto& row : t)
            if (row.stratum != "overall" && std::find(tiers.begin(), tiers.end(), row.stratum) == tiers.end())
                tiers.push_back(row.stratum);
    std::sort(tiers.begin(), tiers.end(), tier_less);
    std::vector<ChartBar> bars;
    for (const auto& tier : tiers)
        for (std::size_t i = 0; i < tables.size(); ++i)
            for (const auto& row : tables[i])
                if (row.stratum == tier && row.metric == metric)
                    bars.push_back({labels[i], tier, row.mean, row.ci_low, row.ci_high});
    return bars;
}

inline std::string xml_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

/// Grouped bar chart (tier groups, one bar per run) with CI whiskers, as a
/// standalone SVG. The bar data is also written next to it as CSV.
inline std::vector<ChartBar> difficulty_chart(const std::vector<std::string>& labels,
                                              const std::vector<std::vector<MetricSummary>>& tables,
                                              std::string_view metric, const fs::path& out_path) {
    const auto bars = chart_data(labels, tables, metric);
    std::vector<std::string> tiers;
    for (const auto& b : bars)
        if (std::find(tiers.begin(), tiers.end(), b.tier) == tiers.end()) tiers.push_back(b.tier);

    static constexpr const char* kPalette[] = {"#4477aa", "#ee6677", "#228833", "#ccbb44", "#66ccee", "#aa3377", "#bbbbbb"};
    const double left = 60, top = 40, plot_w = 520, plot_h = 260;
    const double group_w = tiers.empty() ? plot_w : plot_w / static_cast<double>(tiers.size());
    const double bar_w = (group_w * 0.8) / static_cast<double>(std::max<std::size_t>(labels.size(), 1));
    const double height = top + plot_h + 60 + 18.0 * static_cast<double>(labels.size());
    auto y_of = [&](double v) { return top + plot_h * (1.0 - std::clamp(v, 0.0, 1.0)); };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"" << fmt_fixed(height, 0)
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"320\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << xml_escape(metric)
        << " by difficulty tier (95% bootstrap CI)</text>\n";
    for (int t = 0; t <= 5; ++t) {
        const double v = t / 5.0, y = y_of(v);
        svg << "<line x1=\"" << left << "\" y1=\"" << fmt_fixed(y, 1) << "\" x2=\"" << left + plot_w << "\" y2=\""
            << fmt_fixed(y, 1) << "\" stroke=\"#dddddd\"/>\n";
        svg << "<text x=\"" << left - 6 << "\" y=\"" << fmt_fixed(y + 4, 1) << "\" text-anchor=\"end\">"
            << fmt_fixed(v, 1) << "</text>\n";
    }
    svg << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + plot_h
        << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << left + plot_w << "\" y2=\""
        << top + plot_h << "\" stroke=\"black\"/>\n";
    for (std::size_t g = 0; g < tiers.size(); ++g) {
        const double gx = left + group_w * static_cast<double>(g);
        svg << "<text x=\"" << fmt_fixed(gx + group_w / 2, 1) << "\" y=\"" << top + plot_h + 18
            << "\" text-anchor=\"middle\">" << xml_escape(tiers[g]) << "</text>\n";
        for (std::size_t r = 0; r < labels.size(); ++r) {
            const auto it = std::find_if(bars.begin(), bars.end(),
                                         [&](const ChartBar& b) { return b.tier == tiers[g] && b.run == labels[r]; });
            if (it == bars.end()) continue;
            const double x = gx + group_w * 0.1 + bar_w * static_cast<double>(r);
            const double cxm = x + bar_w / 2;
            svg << "<rect class=\"bar\" x=\"" << fmt_fixed(x, 1) << "\" y=\"" << fmt_fixed(y_of(it->mean), 1)
                << "\" width=\"" << fmt_fixed(bar_w * 0.9, 1) << "\" height=\""
                << fmt_fixed(top + plot_h - y_of(it->mean), 1) << "\" fill=\"" << kPalette[r % 7] << "\"><title>"
                << xml_escape(labels[r]) << " " << xml_escape(tiers[g]) << ": " << fmt_fixed(it->mean, 3)
                << "</title></rect>\n";
            svg << "<path d=\"M" << fmt_fixed(cxm, 1) << " " << fmt_fixed(y_of(it->ci_low), 1) << " V"
                << fmt_fixed(y_of(it->ci_high), 1) << " M" << fmt_fixed(cxm - 4, 1) << " "
                << fmt_fixed(y_of(it->ci_low), 1) << " H" << fmt_fixed(cxm + 4, 1) << " M" << fmt_fixed(cxm - 4, 1)
                << " " << fmt_fixed(y_of(it->ci_high), 1) << " H" << fmt_fixed(cxm + 4, 1)
                << "\" stroke=\"black\" fill=\"none\"/>\n";
        }
    }
    for (std::size_t r = 0; r < labels.size(); ++r) {
        const double y = top + plot_h + 36 + 18.0 * static_cast<double>(r);
        svg << "<rect x=\"" << left << "\" y=\"" << fmt_fixed(y, 1) << "\" width=\"12\" height=\"12\" fill=\""
            << kPalette[r % 7] << "\"/>\n";
        svg << "<text x=\"" << left + 18 << "\" y=\"" << fmt_fixed(y + 10, 1) << "\">" << xml_escape(labels[r])
            << "</text>\n";
    }
    svg << "</svg>\n";

    if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
    write_text_file(out_path, svg.str());
    std::string csv = "run,tier,metric,mean,ci_low,ci_high\n";
    for (const auto& b : bars)
        csv += csv_field(b.run) + "," + b.tier + "," + std::string(metric) + "," + fmt_fixed(b.mean, 6) + "," +
               fmt_fixed(b.ci_low, 6) + "," + fmt_fixed(b.ci_high, 6) + "\n";
    fs::path csv_path = out_path;
    csv_path.replace_extension(".csv");
    write_text_file(csv_path, csv);
    return bars;
}

}  // namespace shapecode
