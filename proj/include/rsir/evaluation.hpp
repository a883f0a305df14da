#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rsir/engine.hpp"
#include "rsir/expansion.hpp"
#include "rsir/manifest.hpp"
#include "rsir/pca.hpp"

namespace rsir {

/// Retrieval-set sizes of the precision-at-N curve.
inline const std::vector<std::size_t> kDefaultPrecisionNs{1, 3, 5, 10, 15, 20};

struct EvaluationConfig {
    ExpansionMethod expansion = ExpansionMethod::None;
    std::vector<std::size_t> ns = kDefaultPrecisionNs;
    std::size_t expansion_depth = kExpansionDepth;
    /// When false the query image may match itself.
    bool leave_one_out = true;

    // Recorded in the report only.
    std::size_t k = 0;
    std::size_t d = 0;
    PcaLevel pca_level = PcaLevel::None;
    std::size_t pca_dim = 0;
    std::uint64_t seed = 0;
};

struct EvaluationReport {
    EvaluationConfig config;
    /// The N used for per_class and average: the largest of config.ns.
    std::size_t headline_n = 20;
    /// Classes in manifest order; mean precision@headline_n over the class's queries.
    std::vector<std::pair<std::string, double>> per_class;
    /// Mean of per_class.
    double average = 0.0;
    /// For each N, the mean over classes of the class-mean precision@N.
    std::map<std::size_t, double> per_n;
    std::size_t queries = 0;
    std::vector<std::string> warnings;

    double class_precision(const std::string& label) const;

    /// Aligned text table: one row per class, then the average and the
    /// precision-at-N curve.
    std::string to_table() const;
    /// One record per class plus a summary record.
    std::string to_json() const;
};

/// Fraction of the first n entries whose class equals `query_class`.
/// Throws Evaluation when the list holds fewer than n entries.
double precision_at_n(const RankedList& ranked, const std::string& query_class, std::size_t n);

/// Uses every manifest image as a query against `index`, which must contain
/// all of them with labels attached. Throws Evaluation otherwise.
EvaluationReport evaluate_dataset(const Index& index, const DatasetManifest& manifest,
                                  const EvaluationConfig& config);

}  // namespace rsir
