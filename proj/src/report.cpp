#include "lexkit/report.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <fmt/format.h>

#include "lexkit/error.hpp"
#include "lexkit/text.hpp"

namespace lexkit {

using nlohmann::json;

namespace {

double mean(double sum, std::size_t n) { return n == 0 ? 0.0 : sum / static_cast<double>(n); }

}  // namespace

TaskReport aggregate(const std::vector<InstanceResult>& results, const TermVocabulary& vocab,
                     const AggregateOptions& options) {
  if (results.empty()) throw ValidationError("no results to aggregate");
  TaskReport report;
  report.task_id = vocab.task_id();
  report.model_id = options.model_id;
  report.weighted_clusters = options.weighted_clusters;

  struct Sums {
    std::size_t n = 0;
    double mrr = 0.0;
    double p1 = 0.0;
  };
  std::vector<Sums> per_label(vocab.labels().size());
  double input_tokens = 0.0;
  double subtokens = 0.0;
  // Instance-id order keeps sums and the per-label sub-token count
  // independent of the input order.
  std::vector<const InstanceResult*> ordered;
  for (const auto& r : results) ordered.push_back(&r);
  std::sort(ordered.begin(), ordered.end(), [](const auto* a, const auto* b) {
    return a->instance_id < b->instance_id;
  });
  for (const auto* rp : ordered) {
    const auto& r = *rp;
    const auto idx = vocab.find(r.gold);
    if (!idx) {
      throw ValidationError(fmt::format("result {} has gold '{}' outside task {}", r.instance_id,
                                        r.gold, vocab.task_id()));
    }
    auto& s = per_label[*idx];
    ++s.n;
    s.mrr += r.instance_mrr;
    s.p1 += r.instance_p1;
    input_tokens += static_cast<double>(r.input_tokens);
  }

  double macro_mrr = 0.0;
  double macro_p1 = 0.0;
  std::size_t covered = 0;
  std::map<std::string, std::size_t> label_k;
  for (const auto* r : ordered) label_k.emplace(r->gold, r->k);
  for (std::size_t i = 0; i < vocab.labels().size(); ++i) {
    const auto& label = vocab.labels()[i];
    const auto& s = per_label[i];
    LabelSummary ls{label.surface, label.cluster, s.n, mean(s.mrr, s.n), mean(s.p1, s.n)};
    if (s.n == 0) {
      report.zero_instance_labels.push_back(label.surface);
    } else {
      macro_mrr += ls.mean_mrr;
      macro_p1 += ls.mean_p1;
      ++covered;
    }
    report.labels.push_back(std::move(ls));
  }
  report.macro_mrr = mean(macro_mrr, covered);
  report.macro_p1 = mean(macro_p1, covered);

  const auto clusters = vocab.clusters();
  if (clusters.size() < vocab.labels().size()) {
    for (const auto& name : clusters) {
      ClusterSummary c{name};
      Sums label_means;
      Sums instances;
      for (std::size_t i = 0; i < report.labels.size(); ++i) {
        const auto& ls = report.labels[i];
        if (ls.cluster != name || ls.n == 0) continue;
        ++c.n_labels;
        c.n_instances += ls.n;
        label_means.mrr += ls.mean_mrr;
        label_means.p1 += ls.mean_p1;
        instances.mrr += per_label[i].mrr;
        instances.p1 += per_label[i].p1;
      }
      if (options.weighted_clusters) {
        c.mean_mrr = mean(instances.mrr, c.n_instances);
        c.mean_p1 = mean(instances.p1, c.n_instances);
      } else {
        c.mean_mrr = mean(label_means.mrr, c.n_labels);
        c.mean_p1 = mean(label_means.p1, c.n_labels);
      }
      report.clusters.push_back(std::move(c));
    }
  }

  auto& st = report.stats;
  st.n_instances = results.size();
  st.avg_input_tokens = input_tokens / static_cast<double>(results.size());
  st.n_labels = vocab.labels().size();
  double label_tokens = 0.0;
  for (const auto& l : vocab.labels()) {
    label_tokens += static_cast<double>(count_whitespace_tokens(l.surface));
  }
  st.avg_tokens_per_label = label_tokens / static_cast<double>(st.n_labels);
  for (const auto& [surface, k] : label_k) subtokens += static_cast<double>(k);
  st.avg_subtokens_per_label = mean(subtokens, label_k.size());
  return report;
}

json TaskReport::to_json() const {
  json labels_json = json::array();
  for (const auto& l : labels) {
    labels_json.push_back({{"label", l.surface},
                           {"cluster", l.cluster},
                           {"n_instances", l.n},
                           {"mean_mrr", l.mean_mrr},
                           {"mean_p1", l.mean_p1}});
  }
  json clusters_json = json::array();
  for (const auto& c : clusters) {
    clusters_json.push_back({{"cluster", c.cluster},
                             {"n_labels", c.n_labels},
                             {"n_instances", c.n_instances},
                             {"mean_mrr", c.mean_mrr},
                             {"mean_p1", c.mean_p1}});
  }
  return {{"task_id", task_id},
          {"model_id", model_id},
          {"macro_mrr", macro_mrr},
          {"macro_p1", macro_p1},
          {"stats",
           {{"n_instances", stats.n_instances},
            {"avg_input_tokens", stats.avg_input_tokens},
            {"n_labels", stats.n_labels},
            {"avg_tokens_per_label", stats.avg_tokens_per_label},
            {"avg_subtokens_per_label", stats.avg_subtokens_per_label}}},
          {"labels", labels_json},
          {"clusters", clusters_json},
          {"weighted_clusters", weighted_clusters},
          {"zero_instance_labels", zero_instance_labels}};
}

TaskReport TaskReport::from_json(const json& doc) {
  try {
    TaskReport r;
    r.task_id = doc.at("task_id").get<std::string>();
    r.model_id = doc.value("model_id", "");
    r.macro_mrr = doc.at("macro_mrr").get<double>();
    r.macro_p1 = doc.at("macro_p1").get<double>();
    const auto& st = doc.at("stats");
    r.stats.n_instances = st.at("n_instances").get<std::size_t>();
    r.stats.avg_input_tokens = st.at("avg_input_tokens").get<double>();
    r.stats.n_labels = st.at("n_labels").get<std::size_t>();
    r.stats.avg_tokens_per_label = st.at("avg_tokens_per_label").get<double>();
    r.stats.avg_subtokens_per_label = st.value("avg_subtokens_per_label", 0.0);
    for (const auto& l : doc.at("labels")) {
      r.labels.push_back({l.at("label").get<std::string>(), l.value("cluster", ""),
                          l.at("n_instances").get<std::size_t>(), l.at("mean_mrr").get<double>(),
                          l.at("mean_p1").get<double>()});
    }
    for (const auto& c : doc.value("clusters", json::array())) {
      r.clusters.push_back({c.at("cluster").get<std::string>(), c.at("n_labels").get<std::size_t>(),
                            c.at("n_instances").get<std::size_t>(),
                            c.at("mean_mrr").get<double>(), c.at("mean_p1").get<double>()});
    }
    r.weighted_clusters = doc.value("weighted_clusters", false);
    r.zero_instance_labels = doc.value("zero_instance_labels", std::vector<std::string>{});
    return r;
  } catch (const json::exception& e) {
    throw ValidationError(fmt::format("malformed task report: {}", e.what()));
  }
}

std::vector<CurveBucket> complexity_curve(const std::vector<InstanceResult>& results) {
  std::map<std::size_t, CurveBucket> buckets;
  for (const auto& r : results) {
    auto& b = buckets[r.k];
    b.k = r.k;
    ++b.count;
    b.mean_mrr += r.instance_mrr;
    b.mean_p1 += r.instance_p1;
  }
  std::vector<CurveBucket> out;
  for (auto& [k, b] : buckets) {
    b.mean_mrr /= static_cast<double>(b.count);
    b.mean_p1 /= static_cast<double>(b.count);
    out.push_back(b);
  }
  return out;
}

std::string curve_to_csv(const std::vector<CurveBucket>& curve) {
  std::string out = "k,count,mean_mrr,mean_p1\n";
  for (const auto& b : curve) {
    out += fmt::format("{},{},{:.6f},{:.6f}\n", b.k, b.count, b.mean_mrr, b.mean_p1);
  }
  return out;
}

std::vector<RankedModel> rank_models(const std::vector<std::pair<std::string, double>>& averages,
                                     double tolerance) {
  if (averages.size() < 2) throw ValidationError("ranking needs at least two models");
  std::vector<RankedModel> out;
  for (const auto& [model, avg] : averages) {
    std::size_t better = 0;
    for (const auto& other : averages) better += other.second > avg + tolerance ? 1 : 0;
    out.push_back({model, avg, better + 1});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const RankedModel& a, const RankedModel& b) { return a.rank < b.rank; });
  return out;
}

std::optional<ReportFormat> parse_report_format(std::string_view name) {
  if (name == "json") return ReportFormat::json;
  if (name == "csv") return ReportFormat::csv;
  if (name == "markdown" || name == "md") return ReportFormat::markdown;
  return std::nullopt;
}

namespace {

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string md_cell(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '|') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace

std::string render(const TaskReport& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::json:
      return report.to_json().dump(2) + "\n";
    case ReportFormat::csv: {
      std::string out = "label,cluster,n_instances,p1,mrr\n";
      for (const auto& l : report.labels) {
        out += fmt::format("{},{},{},{:.6f},{:.6f}\n", csv_field(l.surface), csv_field(l.cluster),
                           l.n, l.mean_p1, l.mean_mrr);
      }
      out += fmt::format("Average,,{},{:.6f},{:.6f}\n", report.stats.n_instances,
                         report.macro_p1, report.macro_mrr);
      return out;
    }
    case ReportFormat::markdown:
      break;
  }
  const std::string model = report.model_id.empty() ? "model" : report.model_id;
  std::string out = fmt::format("## {}\n\n", report.task_id);
  out += fmt::format("Statistics: #T {:.0f}, #L {}, #T/L {:.1f}, instances {}\n\n",
                     report.stats.avg_input_tokens, report.stats.n_labels,
                     report.stats.avg_tokens_per_label, report.stats.n_instances);
  out += fmt::format("| Label | n | {} P@1 | {} MRR |\n|---|---:|---:|---:|\n", md_cell(model),
                     md_cell(model));
  for (const auto& l : report.labels) {
    if (l.n == 0) {
      out += fmt::format("| {} | 0 | - | - |\n", md_cell(l.surface));
    } else {
      out += fmt::format("| {} | {} | {:.2f} | {:.2f} |\n", md_cell(l.surface), l.n, l.mean_p1,
                         l.mean_mrr);
    }
  }
  out += fmt::format("| **Average** | {} | {:.2f} | {:.2f} |\n", report.stats.n_instances,
                     report.macro_p1, report.macro_mrr);
  if (!report.clusters.empty()) {
    out += fmt::format("\n| Cluster | labels | P@1 | MRR |\n|---|---:|---:|---:|\n");
    for (const auto& c : report.clusters) {
      out += fmt::format("| {} | {} | {:.2f} | {:.2f} |\n", md_cell(c.cluster), c.n_labels,
                         c.mean_p1, c.mean_mrr);
    }
  }
  if (!report.zero_instance_labels.empty()) {
    out += "\nLabels without instances: ";
    for (std::size_t i = 0; i < report.zero_instance_labels.size(); ++i) {
      out += (i ? ", " : "") + report.zero_instance_labels[i];
    }
    out += "\n";
  }
  return out;
}

std::string render_leaderboard(const std::vector<TaskReport>& reports, ReportFormat format) {
  if (reports.empty()) throw ValidationError("no task reports to render");
  std::vector<std::string> tasks;
  std::vector<std::string> models;
  std::map<std::pair<std::string, std::string>, const TaskReport*> cells;
  std::map<std::string, const TaskReport*> task_stats;
  for (const auto& r : reports) {
    if (std::find(tasks.begin(), tasks.end(), r.task_id) == tasks.end()) tasks.push_back(r.task_id);
    if (std::find(models.begin(), models.end(), r.model_id) == models.end()) {
      models.push_back(r.model_id);
    }
    if (!cells.emplace(std::pair{r.task_id, r.model_id}, &r).second) {
      throw ValidationError(
          fmt::format("two reports for task {} and model {}", r.task_id, r.model_id));
    }
    task_stats.emplace(r.task_id, &r);
  }

  struct Average {
    double p1 = 0.0;
    double mrr = 0.0;
    std::size_t n = 0;
  };
  std::vector<Average> averages(models.size());
  for (std::size_t m = 0; m < models.size(); ++m) {
    for (const auto& t : tasks) {
      const auto it = cells.find({t, models[m]});
      if (it == cells.end()) continue;
      averages[m].p1 += it->second->macro_p1;
      averages[m].mrr += it->second->macro_mrr;
      ++averages[m].n;
    }
    averages[m].p1 = mean(averages[m].p1, averages[m].n);
    averages[m].mrr = mean(averages[m].mrr, averages[m].n);
  }
  std::vector<std::size_t> ranks(models.size(), 1);
  if (models.size() >= 2) {
    std::vector<std::pair<std::string, double>> avg;
    for (std::size_t m = 0; m < models.size(); ++m) avg.emplace_back(models[m], averages[m].mrr);
    for (const auto& ranked : rank_models(avg)) {
      const auto pos = std::find(models.begin(), models.end(), ranked.model_id) - models.begin();
      ranks[static_cast<std::size_t>(pos)] = ranked.rank;
    }
  }

  if (format == ReportFormat::json) {
    json cells_json = json::array();
    for (const auto& t : tasks) {
      for (const auto& m : models) {
        const auto it = cells.find({t, m});
        if (it == cells.end()) continue;
        cells_json.push_back({{"task_id", t},
                              {"model_id", m},
                              {"macro_p1", it->second->macro_p1},
                              {"macro_mrr", it->second->macro_mrr}});
      }
    }
    json avg_json = json::array();
    for (std::size_t m = 0; m < models.size(); ++m) {
      avg_json.push_back({{"model_id", models[m]},
                          {"tasks", averages[m].n},
                          {"macro_p1", averages[m].p1},
                          {"macro_mrr", averages[m].mrr},
                          {"rank", ranks[m]}});
    }
    json tasks_json = json::array();
    for (const auto& t : tasks) {
      const auto& st = task_stats.at(t)->stats;
      tasks_json.push_back({{"task_id", t},
                            {"avg_input_tokens", st.avg_input_tokens},
                            {"n_labels", st.n_labels},
                            {"avg_tokens_per_label", st.avg_tokens_per_label}});
    }
    return json{{"tasks", tasks_json}, {"models", models}, {"cells", cells_json},
                {"averages", avg_json}}
               .dump(2) +
           "\n";
  }

  if (format == ReportFormat::csv) {
    std::string out = "task,model,avg_input_tokens,n_labels,avg_tokens_per_label,p1,mrr\n";
    for (const auto& t : tasks) {
      const auto& st = task_stats.at(t)->stats;
      for (const auto& m : models) {
        const auto it = cells.find({t, m});
        if (it == cells.end()) continue;
        out += fmt::format("{},{},{:.1f},{},{:.2f},{:.6f},{:.6f}\n", csv_field(t), csv_field(m),
                           st.avg_input_tokens, st.n_labels, st.avg_tokens_per_label,
                           it->second->macro_p1, it->second->macro_mrr);
      }
    }
    for (std::size_t m = 0; m < models.size(); ++m) {
      out += fmt::format("Average,{},,,,{:.6f},{:.6f}\n", csv_field(models[m]), averages[m].p1,
                         averages[m].mrr);
    }
    return out;
  }

  std::string out = "| Task | #T | #L | #T/L |";
  std::string rule = "|---|---:|---:|---:|";
  for (const auto& m : models) {
    out += fmt::format(" {} P@1 | {} MRR |", md_cell(m), md_cell(m));
    rule += "---:|---:|";
  }
  out += "\n" + rule + "\n";
  for (const auto& t : tasks) {
    const auto& st = task_stats.at(t)->stats;
    out += fmt::format("| {} | {:.0f} | {} | {:.1f} |", md_cell(t), st.avg_input_tokens,
                       st.n_labels, st.avg_tokens_per_label);
    for (const auto& m : models) {
      const auto it = cells.find({t, m});
      if (it == cells.end()) {
        out += " - | - |";
      } else {
        out += fmt::format(" {:.2f} | {:.2f} |", it->second->macro_p1, it->second->macro_mrr);
      }
    }
    out += "\n";
  }
  out += "| **Average** | | | |";
  for (const auto& a : averages) out += fmt::format(" {:.2f} | {:.2f} |", a.p1, a.mrr);
  out += "\n| **Model Rank** | | | |";
  for (std::size_t r : ranks) out += fmt::format(" {} | |", r);
  return out + "\n";
}

}  // namespace lexkit
