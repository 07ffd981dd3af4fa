#include "affineopt/io.hpp"

#include <fstream>

#include <fmt/format.h>

#include "affineopt/errors.hpp"

namespace affineopt {

using nlohmann::json;

namespace {

json to_array(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

Vector vector_from(const json& j, const char* what) {
  if (!j.is_array()) throw InputError(fmt::format("instance: '{}' must be an array", what));
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

}  // namespace

json instance_to_json(const ProblemInstance& inst, const std::string& matrix_path) {
  const Objective& obj = *inst.objective;
  json params;
  if (const auto* q = dynamic_cast<const QuadraticObjective*>(&obj)) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < q->hessian().rows(); ++i) rows.push_back(to_array(q->hessian().row(i).transpose()));
    params = {{"A", rows}, {"c", to_array(q->linear())}};
  } else if (const auto* s = dynamic_cast<const SmoothedL1Objective*>(&obj)) {
    params = {{"e", s->smoothing()}};
  } else {
    throw UnsupportedOracleError(fmt::format("cannot serialize objective kind '{}'", obj.kind()));
  }
  return {{"objective", {{"kind", std::string(obj.kind())}, {"params", params}, {"mu", obj.mu()}, {"lip", obj.lip()}}},
          {"K", matrix_path},
          {"b", to_array(inst.b())}};
}

ProblemInstance instance_from_json(const json& doc, const std::filesystem::path& base_dir) {
  try {
    const json& o = doc.at("objective");
    const auto kind = o.at("kind").get<std::string>();
    const json& params = o.at("params");

    std::filesystem::path kpath = doc.at("K").get<std::string>();
    if (kpath.is_relative()) kpath = base_dir / kpath;
    DenseMatrix k = read_matrix_csv(kpath);
    Vector b = vector_from(doc.at("b"), "b");

    std::shared_ptr<const Objective> obj;
    if (kind == "quadratic") {
      const json& rows = params.at("A");
      const auto n = static_cast<Eigen::Index>(rows.size());
      Eigen::MatrixXd a(n, n);
      for (Eigen::Index i = 0; i < n; ++i) {
        const Vector row = vector_from(rows[static_cast<std::size_t>(i)], "A row");
        if (row.size() != n) throw InputError("instance: A must be square");
        a.row(i) = row.transpose();
      }
      Vector c = vector_from(params.at("c"), "c");
      if (o.contains("mu") && o.contains("lip")) {
        obj = std::make_shared<const QuadraticObjective>(std::move(a), std::move(c), o["mu"].get<double>(),
                                                         o["lip"].get<double>());
      } else {
        obj = std::make_shared<const QuadraticObjective>(std::move(a), std::move(c));
      }
    } else if (kind == "smoothed_l1") {
      obj = std::make_shared<const SmoothedL1Objective>(k.cols(), params.at("e").get<double>());
    } else {
      throw InputError(fmt::format("instance: unknown objective kind '{}'", kind));
    }
    return ProblemInstance(std::move(obj), AffineConstraint{InstrumentedMap(std::move(k)), std::move(b)});
  } catch (const json::exception& e) {
    throw InputError(fmt::format("instance: malformed document: {}", e.what()));
  }
}

std::filesystem::path save_instance(const ProblemInstance& inst, const std::filesystem::path& dir,
                                    const std::string& stem) {
  std::filesystem::create_directories(dir);
  const std::string matrix_name = stem + "_K.csv";
  write_matrix_csv(dir / matrix_name, inst.K());
  const auto json_path = dir / (stem + ".json");
  std::ofstream out(json_path);
  if (!out) throw InputError(fmt::format("cannot write {}", json_path.string()));
  out << instance_to_json(inst, matrix_name).dump(2) << '\n';
  return json_path;
}

ProblemInstance load_instance(const std::filesystem::path& json_path) {
  std::ifstream in(json_path);
  if (!in) throw InputError(fmt::format("cannot open instance {}", json_path.string()));
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw InputError(fmt::format("instance {}: {}", json_path.string(), e.what()));
  }
  return instance_from_json(doc, json_path.parent_path());
}

}  // namespace affineopt
