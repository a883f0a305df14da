#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rsir/cli.hpp"
#include "temp_dir.hpp"

using namespace rsir;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("full pipeline through the command line", "[cli]") {
    test::TempDir dir;
    const std::string data = (dir / "data").string();
    const std::string models = (dir / "models").string();

    auto r = run({"synth", "--classes", "4", "--images", "10", "--per-image", "60", "--dim", "16",
                  "--seed", "5", "--out", data});
    REQUIRE(r.code == cli::kOk);
    // the exact configuration is logged
    REQUIRE(r.err.find("seed=5") != std::string::npos);

    REQUIRE(run({"validate", "--dataset", data}).code == cli::kOk);

    r = run({"train-codebook", "--dataset", data, "--k", "4", "--per-image", "30", "--out", models});
    REQUIRE(r.code == cli::kOk);
    REQUIRE(std::filesystem::exists(dir / "models" / "codebook.rcbk"));

    r = run({"train-codebook", "--dataset", data, "--k", "5", "--out", (dir / "k5").string()});
    REQUIRE(r.code == cli::kOk);
    REQUIRE(r.err.find("note: k=5") != std::string::npos);

    r = run({"build-index", "--dataset", data, "--codebook", models + "/codebook.rcbk", "--out", models});
    REQUIRE(r.code == cli::kOk);

    r = run({"query", "--index", models + "/index.rvlad", "--dataset", data, "--id", "class01_0003",
             "--top-k", "5", "--expansion", "psum"});
    REQUIRE(r.code == cli::kOk);
    std::istringstream lines(r.out);
    std::string line;
    int count = 0;
    while (std::getline(lines, line)) {
        ++count;
        REQUIRE(line.find("class01_0003") == std::string::npos);
    }
    REQUIRE(count == 5);

    r = run({"query", "--index", models + "/index.rvlad", "--codebook", models + "/codebook.rcbk",
             "--descriptors", data + "/descriptors/class02_0001.rdesc", "--top-k", "3", "--include-self"});
    REQUIRE(r.code == cli::kOk);
    REQUIRE(r.out.rfind("1\tclass02_0001", 0) == 0);

    const std::string report = (dir / "out" / "report.txt").string();
    const std::string json = (dir / "out" / "report.json").string();
    r = run({"evaluate", "--dataset", data, "--index", models + "/index.rvlad", "--n", "1,3,5", "--expansion",
             "pinv", "--report", report, "--json", json});
    REQUIRE(r.code == cli::kOk);
    REQUIRE(slurp(report) == r.out);
    const auto j = nlohmann::json::parse(slurp(json));
    REQUIRE(j["config"]["expansion"] == "pinv");
    REQUIRE(j["per_n"].size() == 3);

    SECTION("feature-level PCA") {
        REQUIRE(run({"train-pca", "--dataset", data, "--level", "feature", "--dim", "8", "--out", models}).code ==
                cli::kOk);
        const std::string pca = models + "/pca.rpca";
        const std::string m2 = (dir / "m2").string();
        REQUIRE(run({"train-codebook", "--dataset", data, "--k", "4", "--pca", pca, "--out", m2}).code == cli::kOk);
        r = run({"build-index", "--dataset", data, "--codebook", m2 + "/codebook.rcbk", "--pca", pca, "--out", m2});
        REQUIRE(r.code == cli::kOk);
        REQUIRE(r.out.find("dim=32") != std::string::npos);
        // codebook trained in the full space does not fit the reduced features
        r = run({"build-index", "--dataset", data, "--codebook", models + "/codebook.rcbk", "--pca", pca,
                 "--pca-level", "feature", "--out", m2});
        REQUIRE(r.code == cli::kDimension);
    }
    SECTION("global-level PCA") {
        r = run({"train-pca", "--dataset", data, "--level", "global", "--dim", "12", "--codebook",
                 models + "/codebook.rcbk", "--out", (dir / "g").string()});
        REQUIRE(r.code == cli::kOk);
        r = run({"build-index", "--dataset", data, "--codebook", models + "/codebook.rcbk", "--pca",
                 (dir / "g" / "pca.rpca").string(), "--out", (dir / "g").string()});
        REQUIRE(r.code == cli::kOk);
        REQUIRE(r.out.find("dim=12") != std::string::npos);
        REQUIRE(r.out.find("pca=global") != std::string::npos);
    }
}

TEST_CASE("identical commands produce identical artifacts", "[cli]") {
    test::TempDir a, b;
    for (const auto* dir : {&a, &b}) {
        const std::string data = (*dir / "d").string();
        REQUIRE(run({"synth", "--classes", "3", "--images", "6", "--per-image", "40", "--dim", "8", "--out", data})
                    .code == cli::kOk);
        REQUIRE(run({"train-codebook", "--dataset", data, "--k", "2", "--seed", "11", "--out", data}).code ==
                cli::kOk);
        REQUIRE(run({"build-index", "--dataset", data, "--codebook", data + "/codebook.rcbk", "--out", data})
                    .code == cli::kOk);
    }
    REQUIRE(slurp(a / "d" / "codebook.rcbk") == slurp(b / "d" / "codebook.rcbk"));
    REQUIRE(slurp(a / "d" / "index.rvlad") == slurp(b / "d" / "index.rvlad"));
}

TEST_CASE("exit codes per error class", "[cli]") {
    test::TempDir dir;
    REQUIRE(run({}).code == cli::kUsage);
    REQUIRE(run({"frobnicate"}).code == cli::kUsage);
    REQUIRE(run({"validate", "--dataset", "x", "--bogus"}).code == cli::kUsage);
    REQUIRE(run({"evaluate", "--dataset", "x", "--index", "y", "--expansion", "mean"}).code == cli::kUsage);
    REQUIRE(run({"--help"}).code == cli::kOk);

    REQUIRE(run({"query", "--index", (dir / "missing.rvlad").string(), "--id", "x"}).code == cli::kIndexMissing);
    REQUIRE(run({"validate", "--dataset", (dir / "nothing.json").string()}).code == cli::kIo);

    {
        std::ofstream(dir / "bad.json") << "{ nope";
    }
    REQUIRE(run({"validate", "--dataset", (dir / "bad.json").string()}).code == cli::kFormat);

    {
        std::ofstream(dir / "m.json") << R"({"name": "m", "d": 4, "classes": ["a"], "images": [{"id": "x", "class": "a", "path": "x.rdesc"}]})";
    }
    const auto r = run({"validate", "--dataset", (dir / "m.json").string()});
    REQUIRE(r.code == cli::kValidationFailed);
    REQUIRE(r.out.find("missing-file") != std::string::npos);

    {
        std::ofstream(dir / "junk.rvlad") << "not an index";
    }
    REQUIRE(run({"query", "--index", (dir / "junk.rvlad").string(), "--id", "x"}).code == cli::kFormat);
}

TEST_CASE("benchmark writes text and JSON tables", "[cli][timing]") {
    test::TempDir dir;
    const auto r = run({"benchmark", "--sizes", "50,100", "--dims", "256,512", "--repetitions", "1", "--out",
                        dir.path().string()});
    REQUIRE(r.code == cli::kOk);
    REQUIRE(std::filesystem::exists(dir / "timing.txt"));
    const auto j = nlohmann::json::parse(slurp(dir / "timing.json"));
    REQUIRE(j["cells"].size() == 4);
    REQUIRE(run({"benchmark", "--sizes", "0"}).code == cli::kUsage);
}
