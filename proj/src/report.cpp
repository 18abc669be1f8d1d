#include "annealfolio/report.hpp"

#include "annealfolio/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <vector>

namespace annealfolio {

namespace {

struct Column {
  std::string title;
  std::map<std::string, double> weights;  // percent
  double return_pct = 0.0;
  double risk_pct = 0.0;
  std::optional<double> sharpe;  // empty renders as "inf"
  double dr = 0.0;
};

double number(const Json& j, const char* key, const std::string& where) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_number()) throw InputError(where + "." + key + " must be a number");
  return it->get<double>();
}

Column read_metrics(const Json& j, const std::string& title) {
  if (!j.is_object()) throw InputError(title + " metrics must be an object");
  Column c;
  c.title = title;
  const auto w = j.find("weights");
  if (w == j.end() || !w->is_object()) throw InputError(title + ".weights must be an object");
  if (w->empty()) throw InputError(title + ".weights is empty");
  for (const auto& [t, v] : w->items()) {
    if (!v.is_number()) throw InputError(title + ".weights." + t + " must be a number");
    c.weights[t] = v.get<double>();
  }
  c.return_pct = number(j, "return_pct", title);
  c.risk_pct = number(j, "risk_pct", title);
  const auto s = j.find("sharpe");
  if (s != j.end() && s->is_number()) {
    c.sharpe = s->get<double>();
  } else if (s == j.end() || !s->is_null()) {
    throw InputError(title + ".sharpe must be a number or null");
  }
  c.dr = number(j, "diversification_ratio", title);
  return c;
}

std::string fmt2(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  // Avoid printing "-0.00".
  return std::string(buf) == "-0.00" ? "0.00" : buf;
}

double round2(double v) { return std::round(v * 100.0) / 100.0; }

std::string render_columns(const std::vector<Column>& cols) {
  std::set<std::string> tickers;
  for (const auto& c : cols) {
    for (const auto& [t, v] : c.weights) tickers.insert(t);
  }

  std::vector<std::pair<std::string, std::vector<std::string>>> rows;
  for (const auto& t : tickers) {
    std::vector<std::string> cells;
    for (const auto& c : cols) {
      const auto it = c.weights.find(t);
      cells.push_back(it == c.weights.end() ? "-" : fmt2(it->second));
    }
    rows.emplace_back(t, std::move(cells));
  }
  auto metric_row = [&](const std::string& label, auto cell) {
    std::vector<std::string> cells;
    for (const auto& c : cols) cells.push_back(cell(c));
    rows.emplace_back(label, std::move(cells));
  };
  // The total adds the printed (rounded) weights so the column reads consistently.
  metric_row("Total", [](const Column& c) {
    double s = 0.0;
    for (const auto& [t, v] : c.weights) s += round2(v);
    return fmt2(s);
  });
  const std::size_t rule_at = rows.size();
  metric_row("Returns", [](const Column& c) { return fmt2(c.return_pct); });
  metric_row("Risk", [](const Column& c) { return fmt2(c.risk_pct); });
  metric_row("Sharpe Ratio", [](const Column& c) { return c.sharpe ? fmt2(*c.sharpe) : std::string("inf"); });
  metric_row("Diversification Ratio", [](const Column& c) { return fmt2(c.dr); });

  std::size_t label_w = std::string("Asset").size();
  for (const auto& [label, cells] : rows) label_w = std::max(label_w, label.size());
  std::vector<std::size_t> widths;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    std::size_t w = cols[i].title.size();
    for (const auto& [label, cells] : rows) w = std::max(w, cells[i].size());
    widths.push_back(w);
  }

  std::ostringstream out;
  auto line = [&](const std::string& label, const std::vector<std::string>& cells) {
    out << label << std::string(label_w - label.size(), ' ');
    for (std::size_t i = 0; i < cells.size(); ++i) {
      out << "  " << std::string(widths[i] - cells[i].size(), ' ') << cells[i];
    }
    out << '\n';
  };
  std::vector<std::string> titles;
  for (const auto& c : cols) titles.push_back(c.title);
  line("Asset", titles);
  std::size_t total_w = label_w;
  for (auto w : widths) total_w += 2 + w;
  const std::string rule(total_w, '-');
  out << rule << '\n';
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (r + 1 == rule_at || r == rule_at) out << rule << '\n';
    line(rows[r].first, rows[r].second);
  }
  return out.str();
}

std::string render_backtest(const Json& doc) {
  const auto& fin = doc.at("final");
  if (!fin.is_object()) throw InputError("final must be an object");
  const double algo = number(fin, "algo", "final");
  const double bench = number(fin, "bench", "final");
  const auto& events = doc.at("events");
  if (!events.is_array()) throw InputError("events must be an array");

  std::ostringstream out;
  out << "Rebalance events: " << events.size() << '\n';
  for (const auto& e : events) {
    out << "  " << e.value("date", std::string("?"));
    const auto flagged = e.value("flagged", std::vector<std::string>{});
    out << "  sold " << flagged.size();
    if (e.contains("bought") && e["bought"].is_object()) out << "  bought " << e["bought"].size();
    if (e.value("degenerate", false)) out << "  (cash held)";
    out << '\n';
  }
  std::string initial = "-";
  if (doc.contains("initial_budget") && doc["initial_budget"].is_number()) {
    initial = fmt2(doc["initial_budget"].get<double>());
  }
  out << "Initial value:   " << initial << '\n';
  out << "Final algorithm: " << fmt2(algo) << '\n';
  out << "Final benchmark: " << fmt2(bench) << '\n';
  return out.str();
}

}  // namespace

std::string render_report(const Json& doc) {
  if (!doc.is_object()) throw InputError("report input must be a JSON object");
  try {
    if (doc.contains("algorithm")) {
      std::vector<Column> cols{read_metrics(doc["algorithm"], "Algorithm")};
      if (doc.contains("benchmark") && !doc["benchmark"].is_null()) {
        cols.push_back(read_metrics(doc["benchmark"], "Benchmark"));
      }
      return render_columns(cols);
    }
    if (doc.contains("metrics")) {
      if (doc["metrics"].is_null()) throw InputError("result carries no metrics");
      std::vector<Column> cols{read_metrics(doc["metrics"], "Algorithm")};
      if (doc.contains("benchmark") && doc["benchmark"].is_object()) {
        cols.push_back(read_metrics(doc["benchmark"], "Benchmark"));
      }
      return render_columns(cols);
    }
    if (doc.contains("events") && doc.contains("final")) return render_backtest(doc);
  } catch (const Json::exception& e) {
    throw InputError(std::string("malformed report input: ") + e.what());
  }
  throw InputError("unrecognized report input: expected a pipeline result, a comparison, or a backtest report");
}

}  // namespace annealfolio
