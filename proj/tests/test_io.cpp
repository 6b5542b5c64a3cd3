#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hiernet/io.hpp"
#include "oracle_helpers.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

using namespace hiernet;
using namespace hiernet::testing;

namespace {

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& name) {
        path = std::filesystem::temp_directory_path() / name;
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

std::string read_text(const std::filesystem::path& p) {
    std::ifstream in(p);
    return std::string(std::istreambuf_iterator<char>(in),
                       std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("dataset round trip is exact") {
    TempDir dir("hiernet_io_dataset");
    std::mt19937_64 rng(3);
    Matrix X = random_matrix(rng, 17, 5, -10.0, 10.0);
    X(0, 0) = 1e-300;
    X(1, 1) = -9.87654321e200;
    X(2, 2) = 3.14159265358979312e-7;
    const Vector y = random_vector(rng, 17, -5.0, 5.0);
    const Dataset data(X, y);

    const auto path = dir.path / "data.csv";
    write_dataset(data, path);
    const Dataset back = read_dataset(path);
    CHECK(back.n_samples() == 17);
    CHECK(back.n_features() == 5);
    CHECK((back.features() - X).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK((back.responses() - y).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("small dataset with header parses") {
    TempDir dir("hiernet_io_small");
    const auto path = dir.path / "two.csv";
    write_text(path, "y,x1\n1.5,2\n-0.5,3\n");
    const Dataset data = read_dataset(path);
    CHECK(data.n_samples() == 2);
    CHECK(data.n_features() == 1);
    CHECK(data.responses()[0] == 1.5);
    CHECK(data.features()(1, 0) == 3.0);
}

TEST_CASE("dataset parser names the offending line") {
    TempDir dir("hiernet_io_bad");
    const auto inf_path = dir.path / "inf.csv";
    write_text(inf_path, "y,x1\n1.0,2.0\ninf,3.0\n");
    CHECK_THROWS_WITH_AS(read_dataset(inf_path), doctest::Contains(":3:"), ParseError);

    const auto short_path = dir.path / "short.csv";
    write_text(short_path, "y,x1,x2\n1.0,2.0\n");
    CHECK_THROWS_WITH_AS(read_dataset(short_path), doctest::Contains(":2:"), ParseError);

    const auto header_path = dir.path / "header.csv";
    write_text(header_path, "y,a\n1.0,2.0\n");
    CHECK_THROWS_AS(read_dataset(header_path), ParseError);

    const auto garbage_path = dir.path / "garbage.csv";
    write_text(garbage_path, "y,x1\n1.0,abc\n");
    CHECK_THROWS_WITH_AS(read_dataset(garbage_path), doctest::Contains(":2:"), ParseError);
}

TEST_CASE("model round trip preserves asymmetric theta exactly") {
    TempDir dir("hiernet_io_model");
    std::mt19937_64 rng(7);

    ModelParams zero = ModelParams::zero(3);
    const auto zero_path = dir.path / "zero.json";
    write_model(zero, zero_path);
    const ModelParams zback = read_model(zero_path);
    CHECK(zback.v_plus.norm() == 0.0);
    CHECK(zback.theta.norm() == 0.0);

    ModelParams p;
    p.v_plus = random_vector(rng, 4, 0.0, 2.0);
    p.v_minus = random_vector(rng, 4, 0.0, 2.0);
    p.theta = random_matrix(rng, 4, 4, -3.0, 3.0);
    p.theta(0, 1) = 0.25;
    p.theta(1, 0) = -0.75;  // keep it asymmetric
    const auto path = dir.path / "model.json";
    write_model(p, path);
    const ModelParams back = read_model(path);
    CHECK((back.v_plus - p.v_plus).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK((back.v_minus - p.v_minus).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK((back.theta - p.theta).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("model reader lists missing fields") {
    TempDir dir("hiernet_io_schema");
    const auto path = dir.path / "broken.json";
    write_text(path, "{\"n\": 2, \"v_plus\": [0, 0]}");
    CHECK_THROWS_WITH_AS(read_model(path), doctest::Contains("v_minus, theta"),
                         SchemaError);
}

TEST_CASE("trace round trip and exact header") {
    TempDir dir("hiernet_io_trace");
    SolveReport report;
    report.trace.push_back({0, 12.5, 0.0, 0.001, 0.0});
    report.trace.push_back({1, 11.25, 0.5, 0.0005, 1e-4});
    const auto path = dir.path / "trace.csv";
    write_trace(report, path);

    const std::string text = read_text(path);
    CHECK(text.rfind("iter,objective,iterate_change,dist_to_symmetry,elapsed_seconds\n",
                     0) == 0);

    const auto back = read_trace(path);
    REQUIRE(back.size() == 2);
    CHECK(back[0].iter == 0);
    CHECK(back[0].objective == 12.5);
    CHECK(back[1].iterate_change == 0.5);
    CHECK(back[1].elapsed_seconds == 1e-4);

    SolveReport single;
    single.trace.push_back({0, 1.0, 0.0, 0.0, 0.0});
    const auto single_path = dir.path / "single.csv";
    write_trace(single, single_path);
    CHECK(read_trace(single_path).size() == 1);

    SolveReport empty;
    CHECK_THROWS_AS(write_trace(empty, dir.path / "none.csv"), ContractError);
}

TEST_CASE("cv table marks the best lambda") {
    TempDir dir("hiernet_io_cv");
    CvResult result;
    result.per_lambda.push_back({2.0, 0.1, 0.01, 0.5, 0.02, 0.55, 0.03, 20});
    result.per_lambda.push_back({4.0, 0.2, 0.01, 0.4, 0.02, 0.45, 0.03, 20});
    result.best_lambda = 4.0;
    const auto path = dir.path / "cv.csv";
    write_cv(result, path);
    const std::string text = read_text(path);
    CHECK(text.find("lambda,train_mean,train_std,val_mean,val_std,test_mean,test_std,"
                    "n_ok,is_best") == 0);
    CHECK(text.find("2,0.1,0.01,0.5,0.02,0.55,0.03,20,0") != std::string::npos);
    CHECK(text.find("4,0.2,0.01,0.4,0.02,0.45,0.03,20,1") != std::string::npos);
}

TEST_CASE("manifest round trips losslessly") {
    TempDir dir("hiernet_io_manifest");
    const auto data_path = dir.path / "input.csv";
    write_text(data_path, "y,x1\n1,2\n");

    RunManifest manifest;
    manifest.library_version = kVersion;
    manifest.created_utc = "2026-01-02T03:04:05Z";
    manifest.seed = 12345;
    manifest.config_json = "{\"command\":\"fit\",\"lambda\":8.0}";
    manifest.input_checksums[data_path.string()] = file_checksum_hex(data_path);

    const auto path = dir.path / "manifest.json";
    write_manifest(manifest, path);
    const RunManifest back = read_manifest(path);
    CHECK(back == manifest);
}

TEST_CASE("checksum changes with content") {
    TempDir dir("hiernet_io_checksum");
    write_text(dir.path / "a", "hello");
    write_text(dir.path / "b", "hello");
    write_text(dir.path / "c", "hello!");
    CHECK(file_checksum_hex(dir.path / "a") == file_checksum_hex(dir.path / "b"));
    CHECK(file_checksum_hex(dir.path / "a") != file_checksum_hex(dir.path / "c"));
}
