#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "noveltyrank/corpus.hpp"
#include "noveltyrank/pairgen.hpp"

namespace noveltyrank::metrics {

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
  bool operator==(const ConfusionCounts&) const = default;
};

struct ClassificationMetrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Label 1 is the positive class. Throws ValidationError when the two maps
/// do not share exactly the same keys.
ConfusionCounts confusion(const std::map<std::string, int>& predictions, const std::map<std::string, int>& labels);

/// Zero denominators yield 0 for precision, recall and F1. Throws when total()==0.
ClassificationMetrics classification_metrics(const ConfusionCounts& counts);

/// Harmonic mean, 0 when precision + recall == 0.
double f1_score(double precision, double recall);

/// Integer search over tp for the confusion matrix closest to reported
/// (accuracy, precision, recall) on a split with `total` items of which
/// `positives` are positive. Minimizes the largest absolute metric error.
ConfusionCounts reconstruct_confusion(std::size_t total, std::size_t positives, double accuracy, double precision,
                                      double recall);

/// Prediction for one comparison; nullopt means the model abstained.
struct PairDecision {
  pairgen::Slot gold = pairgen::Slot::A;
  std::optional<pairgen::Slot> predicted;
  std::optional<corpus::Domain> domain;
  /// Set by swap-ensemble judges whose two orders disagreed.
  bool inconsistent = false;
};

struct DomainAgreement {
  double agreement = 0.0;
  std::size_t correct = 0;
  std::size_t pair_count = 0;
};

struct AgreementReport {
  double overall = 0.0;
  std::size_t correct = 0;
  std::size_t total = 0;
  std::map<corpus::Domain, DomainAgreement> per_domain;
  std::size_t inconsistent_count = 0;
};

/// Fraction of decisions matching gold; abstentions count as wrong.
/// Throws ValidationError on empty input.
AgreementReport pairwise_agreement(const std::vector<PairDecision>& decisions);

struct DomainRow {
  corpus::Domain domain;
  double agreement = 0.0;
  std::size_t pair_count = 0;
  /// Domain's share of the training set.
  double train_share = 0.0;
  /// Proportion of positive labels among the domain's training papers.
  double train_positive_share = 0.0;
};

/// One row per domain present in the decisions or the training stats, in
/// fixed domain order. Decisions without a domain are grouped under Other.
std::vector<DomainRow> domain_breakdown(const std::vector<PairDecision>& decisions,
                                        const corpus::CorpusStats& train_stats);

enum class ReportFormat { jsonl, table };

std::string format_domain_rows(const std::vector<DomainRow>& rows, ReportFormat format);
std::string format_classification(const ConfusionCounts& counts, const ClassificationMetrics& m, ReportFormat format);
std::string format_agreement(const AgreementReport& report, ReportFormat format);

nlohmann::json to_json(const std::vector<DomainRow>& rows);

}  // namespace noveltyrank::metrics
