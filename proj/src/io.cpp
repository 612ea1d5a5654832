#include "koopman/io.hpp"

#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>

#include <json.hpp>

static_assert(std::endian::native == std::endian::little,
              "snapshot binaries are little-endian float64");

namespace koopman {

namespace fs = std::filesystem;
using nlohmann::json;

std::string fnv1a64_hex(const char* data, size_t size) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (size_t i = 0; i < size; ++i) {
        h ^= static_cast<unsigned char>(data[i]);
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

namespace {

void write_matrix_bin(const RealMatrix& m, const std::string& path, json& entry) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("export: cannot open " + path);
    const char* bytes = reinterpret_cast<const char*>(m.data());
    const size_t size = sizeof(double) * static_cast<size_t>(m.size());
    out.write(bytes, static_cast<std::streamsize>(size));
    entry["file"] = fs::path(path).filename().string();
    entry["checksum"] = "fnv1a64:" + fnv1a64_hex(bytes, size);
}

RealMatrix read_matrix_bin(const std::string& path, Index rows, Index cols,
                           const std::string& checksum, const std::string& field) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("ingest: " + field + ": cannot open " + path);
    RealMatrix m(rows, cols);
    const size_t size = sizeof(double) * static_cast<size_t>(m.size());
    in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(size));
    if (in.gcount() != static_cast<std::streamsize>(size)) {
        throw IoError("ingest: " + field + ": file shorter than rows*cols");
    }
    const std::string got =
        "fnv1a64:" + fnv1a64_hex(reinterpret_cast<const char*>(m.data()), size);
    if (!checksum.empty() && got != checksum) {
        throw IoError("ingest: " + field + ": checksum mismatch (" + got +
                      " != " + checksum + ")");
    }
    return m;
}

const json& field(const json& j, const char* name) {
    auto it = j.find(name);
    if (it == j.end()) throw IoError(std::string("ingest: missing field '") + name + "'");
    return *it;
}

json vector_to_json(const RealVector& v) {
    json out = json::array();
    for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

RealVector vector_from_json(const json& j, const char* name) {
    if (!j.is_array()) throw IoError(std::string("ingest: field '") + name + "' must be an array");
    RealVector v(static_cast<Index>(j.size()));
    for (Index i = 0; i < v.size(); ++i) v(i) = j[static_cast<size_t>(i)].get<double>();
    return v;
}

json complex_matrix_to_json(const ComplexMatrix& m) {
    json data = json::array();
    for (Index c = 0; c < m.cols(); ++c) {
        for (Index r = 0; r < m.rows(); ++r) {
            data.push_back(json::array({m(r, c).real(), m(r, c).imag()}));
        }
    }
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

ComplexMatrix complex_matrix_from_json(const json& j, const char* name) {
    const Index rows = field(j, "rows").get<Index>();
    const Index cols = field(j, "cols").get<Index>();
    const json& data = field(j, "data");
    if (static_cast<Index>(data.size()) != rows * cols) {
        throw IoError(std::string("import: field '") + name + "' has wrong element count");
    }
    ComplexMatrix m(rows, cols);
    size_t k = 0;
    for (Index c = 0; c < cols; ++c) {
        for (Index r = 0; r < rows; ++r, ++k) {
            m(r, c) = Complex(data[k][0].get<double>(), data[k][1].get<double>());
        }
    }
    return m;
}

json real_matrix_to_json(const RealMatrix& m) {
    json data = json::array();
    for (Index c = 0; c < m.cols(); ++c) {
        for (Index r = 0; r < m.rows(); ++r) data.push_back(m(r, c));
    }
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

RealMatrix real_matrix_from_json(const json& j, const char* name) {
    const Index rows = field(j, "rows").get<Index>();
    const Index cols = field(j, "cols").get<Index>();
    const json& data = field(j, "data");
    if (static_cast<Index>(data.size()) != rows * cols) {
        throw IoError(std::string("import: field '") + name + "' has wrong element count");
    }
    RealMatrix m(rows, cols);
    size_t k = 0;
    for (Index c = 0; c < cols; ++c) {
        for (Index r = 0; r < rows; ++r, ++k) m(r, c) = data[k].get<double>();
    }
    return m;
}

}  // namespace

void export_snapshots(const SnapshotSet& set, const std::string& prefix) {
    json manifest;
    manifest["format"] = "snapshot-set-v1";
    manifest["rows"] = set.rows();
    manifest["cols"] = set.cols();
    manifest["dt"] = set.dt;

    json states;
    write_matrix_bin(set.states, prefix + "_states.bin", states);
    manifest["states"] = states;

    if (set.has_derivatives()) {
        json deriv;
        write_matrix_bin(set.derivatives, prefix + "_derivatives.bin", deriv);
        manifest["derivatives"] = deriv;
    } else {
        manifest["derivatives"] = nullptr;
    }

    manifest["normalization"] = {
        {"applied", set.normalization.applied},
        {"shift", vector_to_json(set.normalization.shift)},
        {"scale", vector_to_json(set.normalization.scale)},
    };
    manifest["provenance"] = {
        {"kind", set.provenance.kind},       {"system", set.provenance.system},
        {"sampler", set.provenance.sampler}, {"seed", set.provenance.seed},
        {"rng", set.provenance.rng},         {"manifest", set.provenance.manifest},
    };

    std::ofstream out(prefix + ".json");
    if (!out) throw IoError("export_snapshots: cannot open " + prefix + ".json");
    out << manifest.dump(2) << '\n';
}

SnapshotSet ingest(const std::string& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw IoError("ingest: cannot open manifest " + manifest_path);
    json manifest;
    try {
        in >> manifest;
    } catch (const json::parse_error& e) {
        throw IoError("ingest: manifest is not valid JSON: " + std::string(e.what()));
    }
    if (field(manifest, "format").get<std::string>() != "snapshot-set-v1") {
        throw IoError("ingest: field 'format' must be 'snapshot-set-v1'");
    }
    const Index rows = field(manifest, "rows").get<Index>();
    const Index cols = field(manifest, "cols").get<Index>();
    if (rows < 1 || cols < 1) throw IoError("ingest: fields 'rows'/'cols' must be positive");

    const fs::path dir = fs::path(manifest_path).parent_path();
    SnapshotSet set;
    set.dt = field(manifest, "dt").get<double>();

    const json& states = field(manifest, "states");
    set.states = read_matrix_bin((dir / field(states, "file").get<std::string>()).string(),
                                 rows, cols,
                                 states.value("checksum", std::string{}), "states");

    const json& deriv = field(manifest, "derivatives");
    if (!deriv.is_null()) {
        set.derivatives =
            read_matrix_bin((dir / field(deriv, "file").get<std::string>()).string(),
                            rows, cols, deriv.value("checksum", std::string{}),
                            "derivatives");
    }

    const json& norm = field(manifest, "normalization");
    set.normalization.applied = field(norm, "applied").get<bool>();
    set.normalization.shift = vector_from_json(field(norm, "shift"), "normalization.shift");
    set.normalization.scale = vector_from_json(field(norm, "scale"), "normalization.scale");
    if (set.normalization.applied &&
        (set.normalization.shift.size() != cols || set.normalization.scale.size() != cols)) {
        throw IoError("ingest: field 'normalization' sizes do not match cols");
    }

    const json& prov = field(manifest, "provenance");
    set.provenance.kind = prov.value("kind", std::string{"ingested"});
    set.provenance.system = prov.value("system", std::string{});
    set.provenance.sampler = prov.value("sampler", std::string{});
    set.provenance.seed = prov.value("seed", std::uint64_t{0});
    set.provenance.rng = prov.value("rng", std::string{});
    set.provenance.manifest = manifest_path;
    return set;
}

void export_model(const KoopmanModel& model, const std::string& path) {
    json j;
    j["format"] = "koopman-model-v1";
    j["method"] = model.method == FitMethod::edmd ? "edmd" : "kdmd";
    j["domain"] = model.domain == TimeDomain::discrete ? "discrete" : "continuous";
    j["dt"] = model.dt;

    json eig = json::array();
    for (Index i = 0; i < model.eigenvalues.size(); ++i) {
        eig.push_back(json::array({model.eigenvalues(i).real(), model.eigenvalues(i).imag()}));
    }
    j["eigenvalues"] = std::move(eig);
    j["eigvec_coeffs"] = complex_matrix_to_json(model.eigvec_coeffs);
    j["modes"] = complex_matrix_to_json(model.modes);

    if (model.method == FitMethod::edmd) {
        j["dictionary"] = {{"max_order", model.dictionary.max_order},
                           {"state_dim", model.dictionary.state_dim},
                           {"per_dimension_order", model.dictionary.per_dimension_order}};
    } else {
        const char* kind = model.kernel.kind == KernelKind::linear      ? "linear"
                           : model.kernel.kind == KernelKind::polynomial ? "polynomial"
                                                                         : "gaussian";
        j["kernel"] = {{"kind", kind},
                       {"sigma", model.kernel.sigma},
                       {"poly_order", model.kernel.poly_order}};
        j["train_x"] = real_matrix_to_json(model.train_x);
    }

    j["conj_partner"] = model.conj_partner;
    j["diagnostics"] = {{"gram_condition", model.diagnostics.gram_condition},
                        {"rank_used", model.diagnostics.rank_used},
                        {"warnings", model.diagnostics.warnings}};

    std::ofstream out(path);
    if (!out) throw IoError("export_model: cannot open " + path);
    out << j.dump(2) << '\n';
}

KoopmanModel import_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("import_model: cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw IoError("import_model: not valid JSON: " + std::string(e.what()));
    }
    if (field(j, "format").get<std::string>() != "koopman-model-v1") {
        throw IoError("import_model: field 'format' must be 'koopman-model-v1'");
    }

    KoopmanModel model;
    const std::string method = field(j, "method").get<std::string>();
    model.method = method == "edmd" ? FitMethod::edmd : FitMethod::kdmd;
    model.domain = field(j, "domain").get<std::string>() == "discrete"
                       ? TimeDomain::discrete
                       : TimeDomain::continuous;
    model.dt = field(j, "dt").get<double>();

    const json& eig = field(j, "eigenvalues");
    model.eigenvalues.resize(static_cast<Index>(eig.size()));
    for (Index i = 0; i < model.eigenvalues.size(); ++i) {
        model.eigenvalues(i) = Complex(eig[static_cast<size_t>(i)][0].get<double>(),
                                       eig[static_cast<size_t>(i)][1].get<double>());
    }
    model.eigvec_coeffs = complex_matrix_from_json(field(j, "eigvec_coeffs"), "eigvec_coeffs");
    model.modes = complex_matrix_from_json(field(j, "modes"), "modes");

    if (model.method == FitMethod::edmd) {
        const json& d = field(j, "dictionary");
        model.dictionary.max_order = field(d, "max_order").get<int>();
        model.dictionary.state_dim = field(d, "state_dim").get<int>();
        model.dictionary.per_dimension_order = field(d, "per_dimension_order").get<bool>();
    } else {
        const json& k = field(j, "kernel");
        const std::string kind = field(k, "kind").get<std::string>();
        model.kernel.kind = kind == "linear"       ? KernelKind::linear
                            : kind == "polynomial" ? KernelKind::polynomial
                                                   : KernelKind::gaussian;
        model.kernel.sigma = field(k, "sigma").get<double>();
        model.kernel.poly_order = field(k, "poly_order").get<int>();
        model.train_x = real_matrix_from_json(field(j, "train_x"), "train_x");
    }

    if (j.contains("conj_partner") && !j["conj_partner"].is_null()) {
        model.conj_partner = j["conj_partner"].get<std::vector<Index>>();
    } else {
        model.conj_partner = conjugate_pairs(model.eigenvalues);
    }
    if (j.contains("diagnostics")) {
        const json& d = j["diagnostics"];
        model.diagnostics.gram_condition = d.value("gram_condition", 0.0);
        model.diagnostics.rank_used = d.value("rank_used", Index{0});
        model.diagnostics.warnings = d.value("warnings", std::vector<std::string>{});
    }
    return model;
}

}  // namespace koopman
