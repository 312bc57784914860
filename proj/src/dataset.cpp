#include "hazfit/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace hazfit {

namespace {

void validate_record(const SurvivalRecord& r, std::size_t q) {
  if (!(r.x >= 0.0) || !std::isfinite(r.x))
    throw ValidationError("record time must be finite and nonnegative");
  if (r.delta != 0 && r.delta != 1) throw ValidationError("record status must be 0 or 1");
  if (r.z.size() != q) throw ValidationError("inconsistent covariate dimension");
  for (double v : r.z)
    if (!std::isfinite(v)) throw ValidationError("covariate values must be finite");
}

}  // namespace

SurvivalDataset::SurvivalDataset(std::vector<SurvivalRecord> records,
                                 std::optional<double> horizon) {
  if (records.empty()) throw ValidationError("dataset must contain at least one record");
  q_ = records.front().z.size();
  for (const auto& r : records) validate_record(r, q_);

  std::vector<std::size_t> idx(records.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (records[a].x != records[b].x) return records[a].x < records[b].x;
    return records[a].delta > records[b].delta;
  });
  records_.reserve(records.size());
  for (std::size_t i : idx) records_.push_back(std::move(records[i]));

  const double max_x = records_.back().x;
  if (horizon) {
    if (!(*horizon > 0.0)) throw ValidationError("horizon must be positive");
    horizon_ = *horizon;
    if (horizon_ < max_x) {
      // explicit truncation: clip and censor
      std::vector<SurvivalRecord> clipped = records_;
      for (auto& r : clipped)
        if (r.x > horizon_) {
          r.x = horizon_;
          r.delta = 0;
        }
      *this = SurvivalDataset(std::move(clipped), horizon_);
      return;
    }
  } else {
    horizon_ = max_x;
    if (horizon_ <= 0.0) horizon_ = 1.0;  // all-zero times; keep a usable window
  }
}

double SurvivalDataset::total_events() const {
  double d = 0.0;
  for (const auto& r : records_) d += r.delta;
  return d;
}

double SurvivalDataset::total_exposure() const {
  double e = 0.0;
  for (const auto& r : records_) e += r.x;
  return e;
}

bool SurvivalDataset::has_censor_times() const {
  for (const auto& r : records_)
    if (!r.censor_time) return false;
  return true;
}

SurvivalDataset SurvivalDataset::with_horizon(double T) const {
  return SurvivalDataset(records_, T);
}

SurvivalDataset SurvivalDataset::without_record(std::size_t i) const {
  if (records_.size() < 2) throw ValidationError("cannot drop the only record");
  std::vector<SurvivalRecord> rest;
  rest.reserve(records_.size() - 1);
  for (std::size_t k = 0; k < records_.size(); ++k)
    if (k != i) rest.push_back(records_[k]);
  return SurvivalDataset(std::move(rest), horizon_);
}

double StepFn::operator()(double s) const {
  // segment index = number of knots strictly below s (left-continuous)
  const auto it = std::lower_bound(knots.begin(), knots.end(), s);
  return values[static_cast<std::size_t>(it - knots.begin())];
}

double CountingView::Y(double s) const { return yhat(s) * static_cast<double>(n); }

double StepEstimate::at(double t) const {
  const auto it = std::upper_bound(jump_times.begin(), jump_times.end(), t);
  if (it == jump_times.begin()) return baseline;
  return values[static_cast<std::size_t>(it - jump_times.begin()) - 1];
}

double StepEstimate::before(double t) const {
  const auto it = std::lower_bound(jump_times.begin(), jump_times.end(), t);
  if (it == jump_times.begin()) return baseline;
  return values[static_cast<std::size_t>(it - jump_times.begin()) - 1];
}

SurvivalDataset load_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty file", 1);
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  auto find_col = [&](const std::string& name) -> long {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<long>(i);
    return -1;
  };

  const long time_col = find_col(schema.time_column);
  const long status_col = find_col(schema.status_column);
  if (time_col < 0) throw ValidationError("missing column: " + schema.time_column);
  if (status_col < 0) throw ValidationError("missing column: " + schema.status_column);

  std::vector<long> z_cols;
  if (!schema.covariate_columns.empty()) {
    for (const auto& name : schema.covariate_columns) {
      const long c = find_col(name);
      if (c < 0) throw ValidationError("missing covariate column: " + name);
      z_cols.push_back(c);
    }
  } else {
    for (int j = 1;; ++j) {
      const long c = find_col("z" + std::to_string(j));
      if (c < 0) break;
      z_cols.push_back(c);
    }
  }
  long censor_col = -1;
  if (!schema.censor_time_column.empty()) {
    censor_col = find_col(schema.censor_time_column);
    if (censor_col < 0)
      throw ValidationError("missing censoring-time column: " + schema.censor_time_column);
  }

  std::vector<SurvivalRecord> records;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    {
      std::stringstream ss(line);
      std::string cell;
      while (std::getline(ss, cell, ',')) cells.push_back(cell);
      if (!line.empty() && line.back() == ',') cells.push_back("");
    }
    if (cells.size() != header.size()) throw ParseError("wrong number of fields", line_no);

    auto parse_num = [&](long col) {
      try {
        std::size_t pos = 0;
        const double v = std::stod(cells[static_cast<std::size_t>(col)], &pos);
        if (pos != cells[static_cast<std::size_t>(col)].size())
          throw std::invalid_argument("trailing junk");
        return v;
      } catch (const std::exception&) {
        throw ParseError("cannot parse numeric field '" + cells[static_cast<std::size_t>(col)] + "'",
                         line_no);
      }
    };

    SurvivalRecord r;
    r.x = parse_num(time_col);
    const double st = parse_num(status_col);
    if (st != 0.0 && st != 1.0)
      throw ValidationError("status must be 0 or 1 at line " + std::to_string(line_no));
    r.delta = static_cast<int>(st);
    if (!(r.x >= 0.0))
      throw ValidationError("negative time at line " + std::to_string(line_no));
    for (long c : z_cols) r.z.push_back(parse_num(c));
    if (censor_col >= 0) r.censor_time = parse_num(censor_col);
    records.push_back(std::move(r));
  }
  if (records.empty()) throw ValidationError("no data rows in " + path);
  return SurvivalDataset(std::move(records));
}

CountingView counting_view(const SurvivalDataset& ds) {
  CountingView cv;
  cv.n = ds.size();
  const auto& rec = ds.records();
  const double n = static_cast<double>(ds.size());

  // yhat knots at distinct observed times; Y(s) = #{x_i >= s} is
  // left-continuous, so the value on (x_(j), x_(j+1)] is the count above x_(j).
  std::vector<double> distinct;
  for (const auto& r : rec)
    if (distinct.empty() || distinct.back() != r.x) distinct.push_back(r.x);
  cv.yhat.knots = distinct;
  cv.yhat.values.resize(distinct.size() + 1);
  std::size_t below = 0;  // #{x_i <= current knot}
  cv.yhat.values[0] = 1.0;
  for (std::size_t k = 0; k < distinct.size(); ++k) {
    while (below < rec.size() && rec[below].x <= distinct[k]) ++below;
    cv.yhat.values[k + 1] = static_cast<double>(rec.size() - below) / n;
  }

  for (std::size_t i = 0; i < rec.size();) {
    const double t = rec[i].x;
    double d = 0.0;
    std::size_t j = i;
    while (j < rec.size() && rec[j].x == t) {
      d += rec[j].delta;
      ++j;
    }
    if (d > 0.0) {
      cv.event_times.push_back(t);
      cv.dN.push_back(d);
      cv.at_risk.push_back(static_cast<double>(rec.size() - i));
    }
    i = j;
  }
  return cv;
}

StepEstimate nelson_aalen(const SurvivalDataset& ds) {
  const CountingView cv = counting_view(ds);
  StepEstimate e;
  e.baseline = 0.0;
  double acc = 0.0;
  for (std::size_t k = 0; k < cv.event_times.size(); ++k) {
    acc += cv.dN[k] / cv.at_risk[k];
    e.jump_times.push_back(cv.event_times[k]);
    e.values.push_back(acc);
  }
  return e;
}

StepEstimate kaplan_meier(const SurvivalDataset& ds, KmTarget target) {
  const auto& rec = ds.records();
  StepEstimate e;
  e.baseline = 1.0;
  double surv = 1.0;
  for (std::size_t i = 0; i < rec.size();) {
    const double t = rec[i].x;
    double d_event = 0.0, d_cens = 0.0;
    std::size_t j = i;
    while (j < rec.size() && rec[j].x == t) {
      if (rec[j].delta == 1)
        d_event += 1.0;
      else
        d_cens += 1.0;
      ++j;
    }
    const double at_risk = static_cast<double>(rec.size() - i);
    double jumps = 0.0, denom = at_risk;
    if (target == KmTarget::lifetime) {
      jumps = d_event;
    } else {
      // events leave the risk set before censorings are assessed
      jumps = d_cens;
      denom = at_risk - d_event;
    }
    if (jumps > 0.0 && denom > 0.0) {
      surv *= (1.0 - jumps / denom);
      if (surv < 0.0) surv = 0.0;
      e.jump_times.push_back(t);
      e.values.push_back(surv);
    }
    i = j;
  }
  return e;
}

}  // namespace hazfit
