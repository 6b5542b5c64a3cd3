#include "hiernet/io.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

namespace hiernet {

namespace {

using json = nlohmann::json;

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);  // shortest round-trip
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view token, const std::filesystem::path& path,
                    std::size_t line, std::size_t column) {
    double value = 0.0;
    const char* begin = token.data();
    const char* end = begin + token.size();
    const auto res = std::from_chars(begin, end, value);
    if (res.ec != std::errc() || res.ptr != end) {
        throw ParseError(path.string() + ":" + std::to_string(line) + ": column " +
                         std::to_string(column) + ": cannot parse '" + std::string(token) +
                         "' as a number");
    }
    if (!std::isfinite(value)) {
        throw ParseError(path.string() + ":" + std::to_string(line) + ": column " +
                         std::to_string(column) + ": non-finite value '" +
                         std::string(token) + "'");
    }
    return value;
}

std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open file: " + path.string());
    }
    return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot open file for writing: " + path.string());
    }
    return out;
}

void finish_output(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) {
        throw Error("write failed: " + path.string());
    }
}

Vector json_to_vector(const json& arr) {
    Vector v(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i) v[static_cast<Eigen::Index>(i)] = arr[i];
    return v;
}

json vector_to_json(const Vector& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

}  // namespace

Dataset read_dataset(const std::filesystem::path& path, SplitRole role) {
    std::ifstream in = open_input(path);
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError(path.string() + ":1: missing header row");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split_csv(line);
    if (header.size() < 2 || header[0] != "y") {
        throw ParseError(path.string() + ":1: expected header 'y,x1,...,xN'");
    }
    const std::size_t n = header.size() - 1;
    for (std::size_t j = 0; j < n; ++j) {
        if (header[j + 1] != "x" + std::to_string(j + 1)) {
            throw ParseError(path.string() + ":1: expected column 'x" +
                             std::to_string(j + 1) + "', found '" +
                             std::string(header[j + 1]) + "'");
        }
    }

    std::vector<double> ys;
    std::vector<double> xs;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto tokens = split_csv(line);
        if (tokens.size() != n + 1) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                             std::to_string(n + 1) + " fields, found " +
                             std::to_string(tokens.size()));
        }
        ys.push_back(parse_double(tokens[0], path, line_no, 1));
        for (std::size_t j = 0; j < n; ++j) {
            xs.push_back(parse_double(tokens[j + 1], path, line_no, j + 2));
        }
    }
    if (ys.empty()) {
        throw ParseError(path.string() + ": no data rows");
    }

    const auto L = static_cast<Eigen::Index>(ys.size());
    Matrix features(L, static_cast<Eigen::Index>(n));
    Vector responses(L);
    for (Eigen::Index l = 0; l < L; ++l) {
        responses[l] = ys[static_cast<std::size_t>(l)];
        for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(n); ++j) {
            features(l, j) = xs[static_cast<std::size_t>(l) * n + static_cast<std::size_t>(j)];
        }
    }
    return Dataset(std::move(features), std::move(responses), role);
}

void write_dataset(const Dataset& data, const std::filesystem::path& path) {
    std::ofstream out = open_output(path);
    out << "y";
    for (Eigen::Index j = 0; j < data.n_features(); ++j) out << ",x" << (j + 1);
    out << "\n";
    for (Eigen::Index l = 0; l < data.n_samples(); ++l) {
        out << format_double(data.responses()[l]);
        for (Eigen::Index j = 0; j < data.n_features(); ++j) {
            out << ',' << format_double(data.features()(l, j));
        }
        out << "\n";
    }
    finish_output(out, path);
}

void write_model(const ModelParams& params, const std::filesystem::path& path) {
    json doc;
    doc["n"] = params.n_features();
    doc["v_plus"] = vector_to_json(params.v_plus);
    doc["v_minus"] = vector_to_json(params.v_minus);
    json theta = json::array();
    for (Eigen::Index i = 0; i < params.theta.rows(); ++i) {
        for (Eigen::Index j = 0; j < params.theta.cols(); ++j) {
            theta.push_back(params.theta(i, j));
        }
    }
    doc["theta"] = theta;
    std::ofstream out = open_output(path);
    out << doc.dump(2) << "\n";
    finish_output(out, path);
}

ModelParams read_model(const std::filesystem::path& path) {
    std::ifstream in = open_input(path);
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    std::string missing;
    for (const char* field : {"n", "v_plus", "v_minus", "theta"}) {
        if (!doc.contains(field)) {
            missing += missing.empty() ? field : std::string(", ") + field;
        }
    }
    if (!missing.empty()) {
        throw SchemaError(path.string() + ": missing fields: " + missing);
    }
    const auto n = doc["n"].get<Eigen::Index>();
    if (n < 1) {
        throw SchemaError(path.string() + ": n must be >= 1");
    }
    if (doc["v_plus"].size() != static_cast<std::size_t>(n) ||
        doc["v_minus"].size() != static_cast<std::size_t>(n) ||
        doc["theta"].size() != static_cast<std::size_t>(n * n)) {
        throw SchemaError(path.string() + ": field sizes inconsistent with n = " +
                          std::to_string(n));
    }
    ModelParams params;
    params.v_plus = json_to_vector(doc["v_plus"]);
    params.v_minus = json_to_vector(doc["v_minus"]);
    params.theta = Matrix(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            params.theta(i, j) = doc["theta"][static_cast<std::size_t>(i * n + j)];
        }
    }
    return params;
}

void write_trace(const SolveReport& report, const std::filesystem::path& path) {
    if (report.trace.empty()) {
        throw ContractError("write_trace: report has no records");
    }
    std::ofstream out = open_output(path);
    out << "iter,objective,iterate_change,dist_to_symmetry,elapsed_seconds\n";
    for (const auto& rec : report.trace) {
        out << rec.iter << ',' << format_double(rec.objective) << ','
            << format_double(rec.iterate_change) << ','
            << format_double(rec.dist_to_symmetry) << ','
            << format_double(rec.elapsed_seconds) << "\n";
    }
    finish_output(out, path);
}

std::vector<SolveReport::Record> read_trace(const std::filesystem::path& path) {
    std::ifstream in = open_input(path);
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError(path.string() + ":1: missing header row");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "iter,objective,iterate_change,dist_to_symmetry,elapsed_seconds") {
        throw ParseError(path.string() + ":1: unexpected trace header");
    }
    std::vector<SolveReport::Record> records;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto tokens = split_csv(line);
        if (tokens.size() != 5) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) +
                             ": expected 5 fields");
        }
        SolveReport::Record rec{};
        rec.iter = static_cast<std::int64_t>(parse_double(tokens[0], path, line_no, 1));
        rec.objective = parse_double(tokens[1], path, line_no, 2);
        rec.iterate_change = parse_double(tokens[2], path, line_no, 3);
        rec.dist_to_symmetry = parse_double(tokens[3], path, line_no, 4);
        rec.elapsed_seconds = parse_double(tokens[4], path, line_no, 5);
        records.push_back(rec);
    }
    return records;
}

void write_cv(const CvResult& result, const std::filesystem::path& path) {
    std::ofstream out = open_output(path);
    out << "lambda,train_mean,train_std,val_mean,val_std,test_mean,test_std,n_ok,is_best\n";
    for (const auto& rec : result.per_lambda) {
        out << format_double(rec.lambda) << ',' << format_double(rec.train_mean) << ','
            << format_double(rec.train_std) << ',' << format_double(rec.val_mean) << ','
            << format_double(rec.val_std) << ',' << format_double(rec.test_mean) << ','
            << format_double(rec.test_std) << ',' << rec.n_ok << ','
            << (rec.lambda == result.best_lambda ? 1 : 0) << "\n";
    }
    finish_output(out, path);
}

void write_manifest(const RunManifest& manifest, const std::filesystem::path& path) {
    json doc;
    doc["library_version"] = manifest.library_version;
    doc["created_utc"] = manifest.created_utc;
    doc["seed"] = manifest.seed;
    doc["config"] = manifest.config_json.empty() ? json::object()
                                                 : json::parse(manifest.config_json);
    doc["input_checksums"] = manifest.input_checksums;
    std::ofstream out = open_output(path);
    out << doc.dump(2) << "\n";
    finish_output(out, path);
}

RunManifest read_manifest(const std::filesystem::path& path) {
    std::ifstream in = open_input(path);
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    std::string missing;
    for (const char* field :
         {"library_version", "created_utc", "seed", "config", "input_checksums"}) {
        if (!doc.contains(field)) {
            missing += missing.empty() ? field : std::string(", ") + field;
        }
    }
    if (!missing.empty()) {
        throw SchemaError(path.string() + ": missing fields: " + missing);
    }
    RunManifest manifest;
    manifest.library_version = doc["library_version"].get<std::string>();
    manifest.created_utc = doc["created_utc"].get<std::string>();
    manifest.seed = doc["seed"].get<std::uint64_t>();
    manifest.config_json = doc["config"].dump();
    manifest.input_checksums =
        doc["input_checksums"].get<std::map<std::string, std::string>>();
    return manifest;
}

std::string file_checksum_hex(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParseError("cannot open file: " + path.string());
    }
    std::uint64_t hash = 0xCBF29CE484222325ULL;  // FNV-1a 64
    char buf[4096];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        const std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            hash ^= static_cast<unsigned char>(buf[i]);
            hash *= 0x100000001B3ULL;
        }
        if (!in) break;
    }
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(hash));
    return std::string(hex);
}

}  // namespace hiernet
