#include "rsir/evaluation.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "rsir/error.hpp"
#include "rsir/parallel.hpp"

namespace rsir {

double precision_at_n(const RankedList& ranked, const std::string& query_class, std::size_t n) {
    if (n == 0) fail(ErrorKind::Evaluation, "precision@N needs N >= 1");
    if (ranked.size() < n) {
        fail(ErrorKind::Evaluation, "precision@" + std::to_string(n) + " needs " + std::to_string(n) +
                                        " ranked entries, have " + std::to_string(ranked.size()));
    }
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) hits += ranked[i].class_label == query_class ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(n);
}

double EvaluationReport::class_precision(const std::string& label) const {
    for (const auto& [name, p] : per_class) {
        if (name == label) return p;
    }
    fail(ErrorKind::Evaluation, "class \"" + label + "\" not in report");
}

EvaluationReport evaluate_dataset(const Index& index, const DatasetManifest& manifest,
                                  const EvaluationConfig& config) {
    if (config.ns.empty()) fail(ErrorKind::Evaluation, "no precision cut-offs requested");
    std::vector<std::size_t> ns = config.ns;
    std::sort(ns.begin(), ns.end());
    ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
    if (ns.front() == 0) fail(ErrorKind::Evaluation, "precision cut-off must be >= 1");
    const std::size_t max_n = ns.back();

    std::vector<std::size_t> rows(manifest.images.size());
    for (std::size_t q = 0; q < manifest.images.size(); ++q) {
        const auto& img = manifest.images[q];
        const auto row = index.find(img.id);
        if (!row) fail(ErrorKind::Evaluation, "image \"" + img.id + "\" has no descriptor in the index");
        if (index.label(*row) != img.class_label) {
            fail(ErrorKind::Evaluation, "index label for \"" + img.id + "\" is \"" + index.label(*row) +
                                            "\", manifest says \"" + img.class_label + "\"");
        }
        rows[q] = *row;
    }

    ExpansionOptions opts;
    opts.method = config.expansion;
    opts.top_k = max_n;
    opts.depth = config.expansion_depth;
    opts.leave_one_out = config.leave_one_out;

    // precision[q][j] = precision@ns[j] for query q
    std::vector<std::vector<double>> precision(manifest.images.size(), std::vector<double>(ns.size()));
    parallel_for(manifest.images.size(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t q = begin; q < end; ++q) {
            const auto row = index.row(rows[q]);
            const GlobalDescriptor query{index.id(rows[q]), std::vector<float>(row.begin(), row.end()), true};
            const RankedList ranked = query_with_expansion(index, query, opts);
            for (std::size_t j = 0; j < ns.size(); ++j) {
                precision[q][j] = precision_at_n(ranked, manifest.images[q].class_label, ns[j]);
            }
        }
    });

    EvaluationReport report;
    report.config = config;
    report.config.ns = ns;
    report.headline_n = max_n;
    report.queries = manifest.images.size();

    std::map<std::string, std::pair<std::vector<double>, std::size_t>> sums;
    for (std::size_t q = 0; q < manifest.images.size(); ++q) {
        auto& [acc, count] = sums[manifest.images[q].class_label];
        acc.resize(ns.size(), 0.0);
        for (std::size_t j = 0; j < ns.size(); ++j) acc[j] += precision[q][j];
        ++count;
    }

    std::vector<std::vector<double>> class_means;
    for (const auto& label : manifest.classes) {
        const auto it = sums.find(label);
        if (it == sums.end() || it->second.second == 0) {
            report.warnings.push_back("class \"" + label + "\" has no queries; omitted");
            continue;
        }
        std::vector<double> means(ns.size());
        for (std::size_t j = 0; j < ns.size(); ++j) {
            means[j] = it->second.first[j] / static_cast<double>(it->second.second);
        }
        report.per_class.emplace_back(label, means.back());
        class_means.push_back(std::move(means));
    }
    if (class_means.empty()) fail(ErrorKind::Evaluation, "no class has any query");

    for (std::size_t j = 0; j < ns.size(); ++j) {
        double s = 0.0;
        for (const auto& m : class_means) s += m[j];
        report.per_n[ns[j]] = s / static_cast<double>(class_means.size());
    }
    report.average = report.per_n[max_n];
    return report;
}

std::string EvaluationReport::to_table() const {
    std::size_t width = 8;
    for (const auto& [name, p] : per_class) width = std::max(width, name.size());
    std::ostringstream out;
    out << "expansion=" << to_string(config.expansion) << " k=" << config.k << " d=" << config.d
        << " pca=" << to_string(config.pca_level);
    if (config.pca_level != PcaLevel::None) out << ":" << config.pca_dim;
    out << " seed=" << config.seed << " leave_one_out=" << (config.leave_one_out ? "yes" : "no")
        << " queries=" << queries << "\n";
    out << std::left << std::setw(static_cast<int>(width) + 2) << "class"
        << "P@" << headline_n << "\n";
    out << std::fixed << std::setprecision(3);
    for (const auto& [name, p] : per_class) {
        out << std::left << std::setw(static_cast<int>(width) + 2) << name << p << "\n";
    }
    out << std::left << std::setw(static_cast<int>(width) + 2) << "Average" << average << "\n\n";
    out << "N   ";
    for (const auto& [n, p] : per_n) out << std::right << std::setw(7) << n;
    out << "\nP@N ";
    for (const auto& [n, p] : per_n) out << std::right << std::setw(7) << p;
    out << "\n";
    for (const auto& w : warnings) out << "warning: " << w << "\n";
    return out.str();
}

std::string EvaluationReport::to_json() const {
    nlohmann::json j;
    j["config"] = {
        {"expansion", to_string(config.expansion)},
        {"k", config.k},
        {"d", config.d},
        {"pca_level", to_string(config.pca_level)},
        {"pca_dim", config.pca_dim},
        {"seed", config.seed},
        {"leave_one_out", config.leave_one_out},
        {"expansion_depth", config.expansion_depth},
    };
    auto classes = nlohmann::json::array();
    for (const auto& [name, p] : per_class) classes.push_back({{"class", name}, {"precision", p}});
    j["classes"] = std::move(classes);
    j["headline_n"] = headline_n;
    j["average"] = average;
    auto curve = nlohmann::json::object();
    for (const auto& [n, p] : per_n) curve[std::to_string(n)] = p;
    j["per_n"] = std::move(curve);
    j["queries"] = queries;
    j["warnings"] = warnings;
    return j.dump(2) + "\n";
}

}  // namespace rsir
