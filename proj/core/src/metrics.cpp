#include "noveltyrank/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include <nlohmann/json.hpp>

#include "noveltyrank/error.hpp"

namespace noveltyrank::metrics {

using json = nlohmann::json;

namespace {

double ratio(std::size_t num, std::size_t den) { return den == 0 ? 0.0 : static_cast<double>(num) / den; }

std::string fixed(double v, int places = 4) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", places, v);
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

}  // namespace

ConfusionCounts confusion(const std::map<std::string, int>& predictions, const std::map<std::string, int>& labels) {
  if (predictions.size() != labels.size()) throw ValidationError("predictions and labels have different key sets");
  ConfusionCounts c;
  auto lit = labels.begin();
  for (const auto& [id, pred] : predictions) {
    if (lit->first != id) throw ValidationError("predictions and labels have different key sets (at '" + id + "')");
    const int label = lit->second;
    ++lit;
    if ((pred != 0 && pred != 1) || (label != 0 && label != 1)) {
      throw ValidationError("prediction/label for '" + id + "' is not 0 or 1");
    }
    if (pred == 1) {
      (label == 1 ? c.tp : c.fp) += 1;
    } else {
      (label == 1 ? c.fn : c.tn) += 1;
    }
  }
  return c;
}

double f1_score(double precision, double recall) {
  const double s = precision + recall;
  return s == 0.0 ? 0.0 : 2.0 * precision * recall / s;
}

ClassificationMetrics classification_metrics(const ConfusionCounts& c) {
  if (c.total() == 0) throw ValidationError("classification metrics need at least one example");
  ClassificationMetrics m;
  m.accuracy = ratio(c.tp + c.tn, c.total());
  m.precision = ratio(c.tp, c.tp + c.fp);
  m.recall = ratio(c.tp, c.tp + c.fn);
  m.f1 = f1_score(m.precision, m.recall);
  return m;
}

ConfusionCounts reconstruct_confusion(std::size_t total, std::size_t positives, double accuracy, double precision,
                                      double recall) {
  if (positives > total) throw ValidationError("positives exceed total");
  const std::size_t negatives = total - positives;
  ConfusionCounts best;
  double best_err = INFINITY;
  for (std::size_t tp = 0; tp <= positives; ++tp) {
    // The fp implied by precision, plus its neighbours to absorb rounding.
    const double fp_guess = precision > 0.0 ? tp / precision - tp : static_cast<double>(negatives);
    const auto centre = static_cast<long long>(std::llround(fp_guess));
    for (long long fp = centre - 1; fp <= centre + 1; ++fp) {
      if (fp < 0 || static_cast<std::size_t>(fp) > negatives) continue;
      ConfusionCounts c{tp, static_cast<std::size_t>(fp), negatives - static_cast<std::size_t>(fp), positives - tp};
      const auto m = classification_metrics(c);
      const double err = std::max({std::abs(m.accuracy - accuracy), std::abs(m.precision - precision),
                                   std::abs(m.recall - recall)});
      if (err < best_err) {
        best_err = err;
        best = c;
      }
    }
  }
  return best;
}

AgreementReport pairwise_agreement(const std::vector<PairDecision>& decisions) {
  if (decisions.empty()) throw ValidationError("pairwise agreement needs at least one decision");
  AgreementReport r;
  for (const auto& d : decisions) {
    const bool ok = d.predicted.has_value() && *d.predicted == d.gold;
    ++r.total;
    if (ok) ++r.correct;
    if (d.inconsistent) ++r.inconsistent_count;
    if (d.domain) {
      auto& row = r.per_domain[*d.domain];
      ++row.pair_count;
      if (ok) ++row.correct;
    }
  }
  r.overall = ratio(r.correct, r.total);
  for (auto& [_, row] : r.per_domain) row.agreement = ratio(row.correct, row.pair_count);
  return r;
}

std::vector<DomainRow> domain_breakdown(const std::vector<PairDecision>& decisions,
                                        const corpus::CorpusStats& train_stats) {
  std::map<corpus::Domain, DomainAgreement> agree;
  for (const auto& d : decisions) {
    auto& a = agree[d.domain.value_or(corpus::Domain::Other)];
    ++a.pair_count;
    if (d.predicted && *d.predicted == d.gold) ++a.correct;
  }
  std::vector<DomainRow> rows;
  for (corpus::Domain domain : corpus::kAllDomains) {
    auto a = agree.find(domain);
    auto s = train_stats.per_domain.find(domain);
    if (a == agree.end() && s == train_stats.per_domain.end()) continue;
    DomainRow row{domain};
    if (a != agree.end()) {
      row.pair_count = a->second.pair_count;
      row.agreement = ratio(a->second.correct, a->second.pair_count);
    }
    if (s != train_stats.per_domain.end()) {
      row.train_share = ratio(s->second.total(), train_stats.total);
      row.train_positive_share = ratio(s->second.positives, s->second.total());
    }
    rows.push_back(row);
  }
  return rows;
}

json to_json(const std::vector<DomainRow>& rows) {
  json out = json::array();
  for (const auto& r : rows) {
    out.push_back({{"domain", corpus::to_string(r.domain)},
                   {"agreement", r.agreement},
                   {"pair_count", r.pair_count},
                   {"train_share", r.train_share},
                   {"train_positive_share", r.train_positive_share}});
  }
  return out;
}

std::string format_domain_rows(const std::vector<DomainRow>& rows, ReportFormat format) {
  std::string out;
  if (format == ReportFormat::jsonl) {
    for (const auto& row : to_json(rows)) out += row.dump() + "\n";
    return out;
  }
  out += pad("domain", 14) + pad("agreement", 11) + pad("pairs", 9) + pad("train_share", 13) + "train_pos_share\n";
  for (const auto& r : rows) {
    out += pad(std::string(corpus::to_string(r.domain)), 14) + pad(fixed(r.agreement), 11) +
           pad(std::to_string(r.pair_count), 9) + pad(fixed(r.train_share), 13) + fixed(r.train_positive_share) + "\n";
  }
  return out;
}

std::string format_classification(const ConfusionCounts& c, const ClassificationMetrics& m, ReportFormat format) {
  if (format == ReportFormat::jsonl) {
    return json{{"tp", c.tp},
                {"fp", c.fp},
                {"tn", c.tn},
                {"fn", c.fn},
                {"accuracy", m.accuracy},
                {"precision", m.precision},
                {"recall", m.recall},
                {"f1", m.f1}}
               .dump() +
           "\n";
  }
  std::string out;
  out += pad("tp", 8) + pad("fp", 8) + pad("tn", 8) + pad("fn", 8) + pad("accuracy", 10) + pad("precision", 11) +
         pad("recall", 8) + "f1\n";
  out += pad(std::to_string(c.tp), 8) + pad(std::to_string(c.fp), 8) + pad(std::to_string(c.tn), 8) +
         pad(std::to_string(c.fn), 8) + pad(fixed(m.accuracy), 10) + pad(fixed(m.precision), 11) +
         pad(fixed(m.recall), 8) + fixed(m.f1) + "\n";
  return out;
}

std::string format_agreement(const AgreementReport& r, ReportFormat format) {
  std::string out;
  if (format == ReportFormat::jsonl) {
    out += json{{"scope", "overall"},
                {"agreement", r.overall},
                {"correct", r.correct},
                {"pair_count", r.total},
                {"inconsistent", r.inconsistent_count}}
               .dump() +
           "\n";
    for (const auto& [d, row] : r.per_domain) {
      out += json{{"scope", corpus::to_string(d)},
                  {"agreement", row.agreement},
                  {"correct", row.correct},
                  {"pair_count", row.pair_count}}
                 .dump() +
             "\n";
    }
    return out;
  }
  out += pad("scope", 14) + pad("agreement", 11) + pad("correct", 9) + "pairs\n";
  out += pad("overall", 14) + pad(fixed(r.overall), 11) + pad(std::to_string(r.correct), 9) +
         std::to_string(r.total) + "\n";
  for (const auto& [d, row] : r.per_domain) {
    out += pad(std::string(corpus::to_string(d)), 14) + pad(fixed(row.agreement), 11) +
           pad(std::to_string(row.correct), 9) + std::to_string(row.pair_count) + "\n";
  }
  if (r.inconsistent_count > 0) out += "inconsistent swap-ensemble verdicts: " + std::to_string(r.inconsistent_count) + "\n";
  return out;
}

}  // namespace noveltyrank::metrics
