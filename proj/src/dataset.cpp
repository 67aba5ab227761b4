#include "clustervar/dataset.hpp"

#include <algorithm>
#include <boost/tokenizer.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <unordered_set>

#include "clustervar/error.hpp"

namespace clustervar {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_line(const std::string& line) {
  using Sep = boost::escaped_list_separator<char>;
  boost::tokenizer<Sep> tok(line, Sep('\\', ',', '"'));
  std::vector<std::string> out;
  for (const auto& field : tok) out.emplace_back(trim(field));
  return out;
}

std::optional<double> parse_number(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return std::nullopt;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

}  // namespace

void DatasetSpec::validate() const {
  std::vector<std::string> all{y_col, cluster_col};
  all.insert(all.end(), x_cols.begin(), x_cols.end());
  all.insert(all.end(), w_cols.begin(), w_cols.end());
  if (absorb_col) all.push_back(*absorb_col);
  if (interact_time_col) all.push_back(*interact_time_col);
  std::set<std::string> seen;
  for (const auto& c : all) {
    if (c.empty()) throw InvalidArgument("empty column name");
    if (!seen.insert(c).second)
      throw InvalidArgument("column '" + c + "' is named in more than one role");
  }
  if (x_cols.empty()) throw InvalidArgument("at least one focal regressor is required");
}

std::size_t CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw MissingColumn(name);
  return static_cast<std::size_t>(it - header.begin());
}

CsvTable parse_csv(std::istream& in, const std::string& source) {
  CsvTable table;
  std::string line;
  bool have_header = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    if (trim(line).empty()) continue;
    std::vector<std::string> fields;
    try {
      fields = split_line(line);
    } catch (const boost::escaped_list_error& e) {
      throw DataError(source + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (!have_header) {
      std::unordered_set<std::string> names;
      for (const auto& h : fields)
        if (!names.insert(h).second) throw DuplicateHeader(h);
      table.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != table.header.size())
      throw DataError(source + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(table.header.size()) + " fields, got " +
                      std::to_string(fields.size()));
    table.rows.push_back(std::move(fields));
  }
  if (!have_header || table.rows.empty()) throw EmptyFile(source);
  return table;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return parse_csv(in, path);
}

LoadedDataset load_table(const CsvTable& table, const DatasetSpec& spec) {
  spec.validate();
  const auto n = static_cast<Index>(table.rows.size());
  auto numeric_column = [&](const std::string& name) {
    const std::size_t c = table.column(name);
    Eigen::VectorXd v(n);
    for (Index i = 0; i < n; ++i) {
      const auto& cell = table.rows[static_cast<std::size_t>(i)][c];
      const auto value = parse_number(cell);
      // rows are 1-based in messages, counting the header as row 0
      if (!value || !std::isfinite(*value))
        throw NonNumericCell(static_cast<std::size_t>(i) + 1, name, cell);
      v(i) = *value;
    }
    return v;
  };
  auto label_column = [&](const std::string& name) {
    const std::size_t c = table.column(name);
    std::vector<std::string> v;
    v.reserve(table.rows.size());
    for (const auto& row : table.rows) v.push_back(row[c]);
    return v;
  };

  LoadedDataset out;
  out.problem.y = numeric_column(spec.y_col);
  out.problem.X.resize(n, static_cast<Index>(spec.x_cols.size()));
  for (std::size_t j = 0; j < spec.x_cols.size(); ++j)
    out.problem.X.col(static_cast<Index>(j)) = numeric_column(spec.x_cols[j]);
  out.x_names = spec.x_cols;

  std::vector<Eigen::VectorXd> controls;
  for (const auto& name : spec.w_cols) controls.push_back(numeric_column(name));

  if (spec.interact_time_col) {
    const auto periods = label_column(*spec.interact_time_col);
    // Numeric period labels sort numerically, anything else lexicographically.
    bool numeric = true;
    for (const auto& p : periods) numeric = numeric && parse_number(p).has_value();
    std::vector<std::string> distinct(periods.begin(), periods.end());
    std::sort(distinct.begin(), distinct.end(), [&](const auto& a, const auto& b) {
      return numeric ? *parse_number(a) < *parse_number(b) : a < b;
    });
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

    out.problem.W = Eigen::MatrixXd::Zero(n, static_cast<Index>(distinct.size() * controls.size()));
    std::map<std::string, Index> period_index;
    for (std::size_t t = 0; t < distinct.size(); ++t)
      period_index[distinct[t]] = static_cast<Index>(t);
    const auto D = static_cast<Index>(controls.size());
    for (std::size_t t = 0; t < distinct.size(); ++t)
      for (std::size_t d = 0; d < controls.size(); ++d)
        out.w_names.push_back(spec.w_cols[d] + "@" + distinct[t]);
    for (Index i = 0; i < n; ++i) {
      const Index t = period_index.at(periods[static_cast<std::size_t>(i)]);
      for (Index d = 0; d < D; ++d)
        out.problem.W(i, t * D + d) = controls[static_cast<std::size_t>(d)](i);
    }
  } else {
    out.problem.W.resize(n, static_cast<Index>(controls.size()));
    for (std::size_t d = 0; d < controls.size(); ++d)
      out.problem.W.col(static_cast<Index>(d)) = controls[d];
    out.w_names = spec.w_cols;
  }

  const auto clusters = label_column(spec.cluster_col);
  out.problem.partition = ClusterPartition(clusters);
  if (spec.absorb_col) out.absorb_labels = label_column(*spec.absorb_col);
  return out;
}

LoadedDataset load_csv(const DatasetSpec& spec) { return load_table(read_csv(spec.path), spec); }

WithinTransformed within_transform(const RegressionProblem& problem,
                                   std::span<const std::string> absorb) {
  if (static_cast<Index>(absorb.size()) != problem.n())
    throw InvalidArgument("absorb labels must cover every row");
  const ClusterPartition groups(absorb);

  auto demean = [&](Eigen::MatrixXd& m) {
    for (Index g = 0; g < groups.num_clusters(); ++g) {
      const auto& rows = groups.members(g);
      const Eigen::RowVectorXd mean =
          m(rows, Eigen::all).colwise().sum() / static_cast<double>(rows.size());
      for (Index i : rows) m.row(i) -= mean;
    }
  };

  WithinTransformed out;
  Eigen::MatrixXd y = problem.y;
  Eigen::MatrixXd x = problem.X;
  Eigen::MatrixXd w = problem.W;
  demean(y);
  demean(x);
  demean(w);

  auto keep = [](const Eigen::MatrixXd& before, const Eigen::MatrixXd& after,
                 std::vector<Index>& kept, std::vector<Index>& dropped) {
    for (Index j = 0; j < before.cols(); ++j) {
      const double orig = before.col(j).norm();
      if (orig == 0.0 || after.col(j).norm() < 1e-12 * orig)
        dropped.push_back(j);
      else
        kept.push_back(j);
    }
  };
  keep(problem.X, x, out.kept_x, out.dropped_x);
  keep(problem.W, w, out.kept_w, out.dropped_w);

  out.problem.y = y.col(0);
  out.problem.X = x(Eigen::all, out.kept_x);
  out.problem.W = w(Eigen::all, out.kept_w);
  out.problem.partition = problem.partition;
  for (Index g = 0; g < groups.num_clusters(); ++g)
    if (groups.cluster_size(g) == 1) out.singleton_groups.push_back(groups.label(g));
  return out;
}

std::vector<std::string> absorb_fixed_effects(LoadedDataset& data) {
  std::vector<std::string> warnings;
  if (data.absorb_labels.empty()) return warnings;
  WithinTransformed t = within_transform(data.problem, data.absorb_labels);
  std::vector<std::string> x_names;
  std::vector<std::string> w_names;
  for (Index j : t.kept_x) x_names.push_back(data.x_names[static_cast<std::size_t>(j)]);
  for (Index j : t.kept_w) w_names.push_back(data.w_names[static_cast<std::size_t>(j)]);
  for (Index j : t.dropped_x)
    warnings.push_back("dropped focal column '" + data.x_names[static_cast<std::size_t>(j)] +
                       "': constant within absorb groups");
  for (Index j : t.dropped_w)
    warnings.push_back("dropped control column '" + data.w_names[static_cast<std::size_t>(j)] +
                       "': constant within absorb groups");
  for (const auto& g : t.singleton_groups)
    warnings.push_back("absorb group '" + g + "' has a single row; its row is zero after demeaning");
  data.problem = std::move(t.problem);
  data.x_names = std::move(x_names);
  data.w_names = std::move(w_names);
  if (data.problem.r() == 0)
    throw DataError("every focal regressor is constant within absorb groups");
  return warnings;
}

}  // namespace clustervar
