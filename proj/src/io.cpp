#include "bcd/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace bcd {

namespace {

using nlohmann::json;

json vector_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Eigen::VectorXd vector_from_json(const json& arr) {
  Eigen::VectorXd v(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
  return v;
}

json matrix_to_json(const Eigen::MatrixXd& m) {  // row-major flat
  json arr = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) arr.push_back(m(i, j));
  return arr;
}

Eigen::MatrixXd matrix_from_json(const json& arr, Eigen::Index rows,
                                 Eigen::Index cols) {
  if (static_cast<Eigen::Index>(arr.size()) != rows * cols)
    throw std::invalid_argument("matrix_from_json: size mismatch");
  Eigen::MatrixXd m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = arr[k++].get<double>();
  return m;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  return fields;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json scm_to_json(const GroundTruthScm& scm) {
  json j;
  j["d"] = scm.latent_dim;
  j["D"] = scm.obs_dim;
  j["perm"] = scm.perm.order;
  j["L"] = matrix_to_json(scm.edges.m);
  j["sigma"] = scm.noise_scale;
  j["proj"] = matrix_to_json(scm.projection);
  return j;
}

GroundTruthScm scm_from_json(const json& j) {
  GroundTruthScm scm;
  scm.latent_dim = j.at("d").get<int>();
  scm.obs_dim = j.at("D").get<int>();
  scm.perm.order = j.at("perm").get<std::vector<int>>();
  if (!scm.perm.valid() || scm.perm.dim() != scm.latent_dim)
    throw std::invalid_argument("scm_from_json: invalid permutation");
  scm.edges = EdgeMatrix::from_matrix(
      matrix_from_json(j.at("L"), scm.latent_dim, scm.latent_dim));
  scm.noise_scale = j.at("sigma").get<double>();
  scm.projection =
      matrix_from_json(j.at("proj"), scm.latent_dim, scm.obs_dim);
  return scm;
}

void save_scm(const std::filesystem::path& path, const GroundTruthScm& scm) {
  write_text(path, scm_to_json(scm).dump(2) + "\n");
}

GroundTruthScm load_scm(const std::filesystem::path& path) {
  return scm_from_json(json::parse(read_text(path)));
}

void save_dataset(const std::filesystem::path& dir, const Dataset& ds,
                  const json& manifest) {
  std::filesystem::create_directories(dir);
  const int d = ds.latent_dim();
  const int obs_dim = ds.obs_dim();

  std::ostringstream data;
  for (int j = 0; j < obs_dim; ++j) data << (j ? "," : "") << "x" << j;
  data << "\n";
  for (long r = 0; r < ds.rows(); ++r) {
    for (int j = 0; j < obs_dim; ++j)
      data << (j ? "," : "") << format_double(ds.x(r, j));
    data << "\n";
  }
  write_text(dir / "data.csv", data.str());

  std::ostringstream labels;
  for (int j = 0; j < d; ++j) labels << (j ? "," : "") << "m" << j;
  for (int j = 0; j < d; ++j) labels << ",v" << j;
  labels << "\n";
  for (long r = 0; r < ds.rows(); ++r) {
    for (int j = 0; j < d; ++j) labels << (j ? "," : "") << ds.mask(r, j);
    for (int j = 0; j < d; ++j) labels << "," << format_double(ds.values(r, j));
    labels << "\n";
  }
  write_text(dir / "labels.csv", labels.str());

  std::ostringstream latents;
  for (int j = 0; j < d; ++j) latents << (j ? "," : "") << "z" << j;
  latents << "\n";
  for (long r = 0; r < ds.rows(); ++r) {
    for (int j = 0; j < d; ++j)
      latents << (j ? "," : "") << format_double(ds.latents(r, j));
    latents << "\n";
  }
  write_text(dir / "latents.csv", latents.str());

  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

Dataset load_dataset(const std::filesystem::path& dir) {
  const auto read_table = [](const std::filesystem::path& path,
                             std::vector<std::vector<double>>* rows) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::vector<double> row;
      for (const auto& f : split_csv_line(line)) row.push_back(std::stod(f));
      rows->push_back(std::move(row));
    }
  };

  std::vector<std::vector<double>> x_rows, label_rows, z_rows;
  read_table(dir / "data.csv", &x_rows);
  read_table(dir / "labels.csv", &label_rows);
  read_table(dir / "latents.csv", &z_rows);
  if (x_rows.empty() || label_rows.size() != x_rows.size() ||
      z_rows.size() != x_rows.size())
    throw std::runtime_error("load_dataset: inconsistent row counts");

  const long n = static_cast<long>(x_rows.size());
  const int obs_dim = static_cast<int>(x_rows[0].size());
  const int d = static_cast<int>(z_rows[0].size());
  if (static_cast<int>(label_rows[0].size()) != 2 * d)
    throw std::runtime_error("load_dataset: labels.csv has wrong width");

  Dataset ds;
  ds.x.resize(n, obs_dim);
  ds.mask.resize(n, d);
  ds.values.resize(n, d);
  ds.latents.resize(n, d);
  for (long r = 0; r < n; ++r) {
    for (int j = 0; j < obs_dim; ++j) ds.x(r, j) = x_rows[r][j];
    for (int j = 0; j < d; ++j) {
      ds.mask(r, j) = static_cast<int>(label_rows[r][j]);
      ds.values(r, j) = label_rows[r][d + j];
      ds.latents(r, j) = z_rows[r][j];
    }
  }
  return ds;
}

json load_dataset_manifest(const std::filesystem::path& dir) {
  return json::parse(read_text(dir / "manifest.json"));
}

json checkpoint_to_json(const PosteriorParams& params, const AdamState& adam,
                        long step) {
  json j;
  j["step"] = step;
  j["d"] = params.latent_dim();
  j["D"] = params.obs_dim();
  json mask = json::array();
  for (const auto& [i, k] : params.mask.positions)
    mask.push_back(json::array({i, k}));
  j["mask"] = mask;
  j["fixed_edges"] = matrix_to_json(params.fixed_edges.m);
  j["edge_loc"] = vector_to_json(params.loc);
  j["edge_log_scale"] = vector_to_json(params.log_scale);
  j["log_noise"] = params.log_noise;
  j["decoder"] = matrix_to_json(params.decoder);
  j["adam"] = {{"m", vector_to_json(adam.m)},
               {"v", vector_to_json(adam.v)},
               {"t", adam.t}};
  return j;
}

Checkpoint checkpoint_from_json(const json& j) {
  Checkpoint ck;
  ck.step = j.at("step").get<long>();
  const int d = j.at("d").get<int>();
  const int obs_dim = j.at("D").get<int>();
  ck.params.mask.d = d;
  for (const auto& pos : j.at("mask"))
    ck.params.mask.positions.emplace_back(pos.at(0).get<int>(),
                                          pos.at(1).get<int>());
  ck.params.mask.validate();
  ck.params.fixed_edges =
      EdgeMatrix::from_matrix(matrix_from_json(j.at("fixed_edges"), d, d));
  ck.params.loc = vector_from_json(j.at("edge_loc"));
  ck.params.log_scale = vector_from_json(j.at("edge_log_scale"));
  ck.params.log_noise = j.at("log_noise").get<double>();
  ck.params.decoder = matrix_from_json(j.at("decoder"), d, obs_dim);
  ck.adam.m = vector_from_json(j.at("adam").at("m"));
  ck.adam.v = vector_from_json(j.at("adam").at("v"));
  ck.adam.t = j.at("adam").at("t").get<long>();
  return ck;
}

void save_checkpoint(const std::filesystem::path& path,
                     const PosteriorParams& params, const AdamState& adam,
                     long step) {
  write_text(path, checkpoint_to_json(params, adam, step).dump(2) + "\n");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return checkpoint_from_json(json::parse(read_text(path)));
}

void write_metrics_csv(const std::filesystem::path& path,
                       const std::vector<MetricsRecord>& records) {
  std::ostringstream out;
  out << "step,eshd,auroc,mse_L,kl_true_learned,mse_X\n";
  for (const auto& r : records) {
    out << r.step << "," << format_double(r.eshd) << ","
        << format_double(r.auroc) << "," << format_double(r.mse_L) << ","
        << format_double(r.kl_true_learned) << "," << format_double(r.mse_X)
        << "\n";
  }
  write_text(path, out.str());
}

std::vector<MetricsRecord> read_metrics_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != "step,eshd,auroc,mse_L,kl_true_learned,mse_X")
    throw std::runtime_error("read_metrics_csv: unexpected header in " +
                             path.string());
  std::vector<MetricsRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 6)
      throw std::runtime_error("read_metrics_csv: malformed row");
    MetricsRecord r;
    r.step = std::stol(fields[0]);
    r.eshd = std::stod(fields[1]);
    r.auroc = std::stod(fields[2]);
    r.mse_L = std::stod(fields[3]);
    r.kl_true_learned = std::stod(fields[4]);
    r.mse_X = std::stod(fields[5]);
    records.push_back(r);
  }
  return records;
}

}  // namespace bcd
