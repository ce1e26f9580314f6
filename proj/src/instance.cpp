#include "jbd/instance.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <Eigen/SVD>
#include <json.hpp>

#include "jbd/rng.hpp"

namespace jbd {

namespace {

constexpr int kFormatVersion = 1;
constexpr const char* kInstanceKind = "jbd-instance";
constexpr const char* kMatrixKind = "jbd-matrix";

std::string double_to_hex(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%a", x);
  return buf;
}

double hex_to_double(const std::string& s) {
  const char* begin = s.c_str();
  char* end = nullptr;
  const double x = std::strtod(begin, &end);
  if (end != begin + s.size())
    throw std::runtime_error("instance file: malformed hex float '" + s + "'");
  return x;
}

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      row.push_back(double_to_hex(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const nlohmann::json& rows, Eigen::Index nr,
                        Eigen::Index nc) {
  if (!rows.is_array() || static_cast<Eigen::Index>(rows.size()) != nr)
    throw std::runtime_error("instance file: matrix row count mismatch");
  Matrix m(nr, nc);
  for (Eigen::Index i = 0; i < nr; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != nc)
      throw std::runtime_error("instance file: matrix column count mismatch");
    for (Eigen::Index j = 0; j < nc; ++j)
      m(i, j) = hex_to_double(row[static_cast<std::size_t>(j)].get<std::string>());
  }
  return m;
}

nlohmann::json parse_file(const std::string& path, const char* expected_kind) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    // e.byte carries the offset of the failure
    throw std::runtime_error("parse error in '" + path + "' at byte " +
                             std::to_string(e.byte) + ": " + e.what());
  }
  if (doc.value("kind", std::string()) != expected_kind)
    throw std::runtime_error("'" + path + "' is not a " +
                             std::string(expected_kind) + " file");
  const int version = doc.value("version", -1);
  if (version != kFormatVersion)
    throw std::runtime_error("'" + path + "': format version " +
                             std::to_string(version) + " unsupported (expected " +
                             std::to_string(kFormatVersion) + ")");
  return doc;
}

void write_file(const nlohmann::json& doc, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << doc.dump(1) << '\n';
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

}  // namespace

InstanceBundle generate(const Partition& tau, int m, double xi,
                        std::uint64_t seed) {
  if (m < 1) throw std::invalid_argument("generate: need m >= 1");
  if (xi < 0.0) throw std::invalid_argument("generate: xi must be >= 0");
  const int n = tau.n();

  // Sub-stream 0: W; rejected draws re-key to 2^32 + attempt.
  // 1..m: D_i. m+1..2m: N_i.
  Matrix w;
  bool ok = false;
  for (int attempt = 0; attempt < 64 && !ok; ++attempt) {
    Rng rng = attempt == 0
                  ? Rng::stream(seed, 0)
                  : Rng::stream(seed, (std::uint64_t{1} << 32) + attempt);
    Matrix raw = rng.normal_matrix(n, n);
    // Orthonormalize each column group (thin QR with positive diagonal).
    w.resize(n, n);
    for (int j = 0; j < tau.t(); ++j) {
      Eigen::HouseholderQR<Matrix> qr(raw.middleCols(tau.offset(j), tau.size(j)));
      Matrix q = qr.householderQ() * Matrix::Identity(n, tau.size(j));
      const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
      for (int c = 0; c < tau.size(j); ++c)
        if (r(c, c) < 0.0) q.col(c) = -q.col(c);
      w.middleCols(tau.offset(j), tau.size(j)) = q;
    }
    const Vector sv = Eigen::JacobiSVD<Matrix>(w).singularValues();
    ok = sv(sv.size() - 1) >= 1e-8;
  }
  if (!ok)
    throw std::runtime_error("generate: could not draw a well-conditioned W");

  const Matrix v = Eigen::FullPivLU<Matrix>(w).inverse().transpose();  // W^{-T}

  InstanceBundle bundle{tau, {}, {}, w, xi, seed};
  bundle.a_clean.reserve(m);
  bundle.a_noisy.reserve(m);
  for (int i = 0; i < m; ++i) {
    Rng rng_d = Rng::stream(seed, static_cast<std::uint64_t>(1 + i));
    Matrix d = Matrix::Zero(n, n);
    for (int j = 0; j < tau.t(); ++j)
      tau.block(d, j, j) = rng_d.normal_matrix(tau.size(j), tau.size(j));
    bundle.a_clean.push_back(v * d * v.transpose());
  }
  for (int i = 0; i < m; ++i) {
    Rng rng_n = Rng::stream(seed, static_cast<std::uint64_t>(1 + m + i));
    const Matrix noise = rng_n.normal_matrix(n, n);
    bundle.a_noisy.push_back(bundle.a_clean[i] + xi * noise);
  }
  return bundle;
}

void save_instance(const InstanceBundle& bundle, const std::string& path) {
  nlohmann::json doc;
  doc["kind"] = kInstanceKind;
  doc["version"] = kFormatVersion;
  doc["tau"] = bundle.tau.sizes();
  doc["n"] = bundle.tau.n();
  doc["m"] = bundle.a_clean.size();
  doc["xi"] = double_to_hex(bundle.xi);
  doc["seed"] = bundle.seed;
  doc["w_true"] = matrix_to_json(bundle.w_true);
  nlohmann::json clean = nlohmann::json::array();
  nlohmann::json noisy = nlohmann::json::array();
  for (const auto& a : bundle.a_clean) clean.push_back(matrix_to_json(a));
  for (const auto& a : bundle.a_noisy) noisy.push_back(matrix_to_json(a));
  doc["a_clean"] = std::move(clean);
  doc["a_noisy"] = std::move(noisy);
  write_file(doc, path);
}

InstanceBundle load_instance(const std::string& path) {
  const nlohmann::json doc = parse_file(path, kInstanceKind);
  try {
    const Partition tau(doc.at("tau").get<std::vector<int>>());
    const int n = doc.at("n").get<int>();
    if (n != tau.n())
      throw std::runtime_error("instance file: n does not match partition");
    const std::size_t m = doc.at("m").get<std::size_t>();
    InstanceBundle bundle{tau,
                          {},
                          {},
                          matrix_from_json(doc.at("w_true"), n, n),
                          hex_to_double(doc.at("xi").get<std::string>()),
                          doc.at("seed").get<std::uint64_t>()};
    const auto& clean = doc.at("a_clean");
    const auto& noisy = doc.at("a_noisy");
    if (clean.size() != m || noisy.size() != m)
      throw std::runtime_error("instance file: matrix count does not match m");
    for (std::size_t i = 0; i < m; ++i) {
      bundle.a_clean.push_back(matrix_from_json(clean[i], n, n));
      bundle.a_noisy.push_back(matrix_from_json(noisy[i], n, n));
    }
    return bundle;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("invalid instance file '" + path + "': " + e.what());
  }
}

void save_matrix(const Matrix& w, const std::string& path) {
  nlohmann::json doc;
  doc["kind"] = kMatrixKind;
  doc["version"] = kFormatVersion;
  doc["rows"] = w.rows();
  doc["cols"] = w.cols();
  doc["data"] = matrix_to_json(w);
  write_file(doc, path);
}

Matrix load_matrix(const std::string& path) {
  const nlohmann::json doc = parse_file(path, kMatrixKind);
  try {
    const auto nr = doc.at("rows").get<Eigen::Index>();
    const auto nc = doc.at("cols").get<Eigen::Index>();
    return matrix_from_json(doc.at("data"), nr, nc);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("invalid matrix file '" + path + "': " + e.what());
  }
}

std::string file_content_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for hashing");
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
    if (!in) break;
  }
  char out[17];
  std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(h));
  return out;
}

}  // namespace jbd
