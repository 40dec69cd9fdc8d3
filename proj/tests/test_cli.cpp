#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const fs::path& scratch() {
    static const fs::path dir = [] {
        auto d = fs::temp_directory_path() / ("stacksl_cli_" + std::to_string(::getpid()));
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

int run(const std::string& args) {
    const std::string cmd = std::string("\"") + STACKSL_CLI_PATH + "\" " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path write_conf(const std::string& name, const std::string& text) {
    const auto p = scratch() / name;
    std::ofstream(p) << text;
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string first_line(const fs::path& p) {
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    return line;
}

}  // namespace

TEST_CASE("simulate writes detail and summary with the documented headers") {
    const auto conf = write_conf("sim.conf", "horizon = 200\ndim = 4\nseeds = 2\n");
    const auto out = scratch() / "sim";
    REQUIRE(run("simulate --config " + conf.string() + " --out " + out.string()) == 0);
    CHECK(first_line(out / "detail.csv") ==
          "run_id,seed,t,learner,queried,q,chosen,optimal,delta,epsilon,raw_loss,clipped_loss,"
          "inst_regret,cum_regret");
    CHECK(first_line(out / "summary.csv") ==
          "learner,beta,c,lambda_kl,mode,seed,regret_per_T,queries_per_T,mean_raw_loss,"
          "max_raw_loss,mean_clipped_loss,max_clipped_loss,wall_time_ms");
    CHECK(slurp(out / "summary.csv").find(",aggregate,") != std::string::npos);
}

TEST_CASE("detail output is byte-identical across worker counts") {
    const auto conf = write_conf("grid.conf",
                                 "horizon = 300\ndim = 4\nseeds = 4\n"
                                 "learner.kind = llf, random-gate\nbudget_fraction = 0.1, 0.5\n");
    const auto a = scratch() / "w1";
    const auto b = scratch() / "w8";
    REQUIRE(run("sweep --config " + conf.string() + " --workers 1 --out " + a.string()) == 0);
    REQUIRE(run("sweep --config " + conf.string() + " --workers 8 --out " + b.string()) == 0);
    const auto da = slurp(a / "detail.csv");
    CHECK(da.size() > 1000);
    CHECK(da == slurp(b / "detail.csv"));
}

TEST_CASE("json format") {
    const auto conf = write_conf("json.conf", "horizon = 50\ndim = 3\n");
    const auto out = scratch() / "json";
    REQUIRE(run("simulate --format json --config " + conf.string() + " --out " + out.string()) == 0);
    CHECK(fs::exists(out / "detail.json"));
    CHECK(slurp(out / "summary.json").front() == '{');
}

TEST_CASE("config errors exit with 1") {
    const auto bad = write_conf("bad.conf", "horizon = 10\nnot_a_key = 3\n");
    CHECK(run("simulate --config " + bad.string() + " --out " + (scratch() / "bad").string()) == 1);
    const auto range = write_conf("range.conf", "budget_fraction = 2\n");
    CHECK(run("simulate --config " + range.string() + " --out " + (scratch() / "bad").string()) == 1);
    CHECK(run("simulate --config " + (scratch() / "missing.conf").string()) == 1);
    const auto clip = write_conf("clip.conf", "horizon = 10\nlearner.mode = ridge-ucb\n");
    CHECK(run("clip-study --config " + clip.string() + " --out " + (scratch() / "bad").string()) == 1);
}

TEST_CASE("validate exits 0 on a healthy config and 2 on an injected fault") {
    const auto ok = write_conf("ok.conf", "horizon = 500\ndim = 4\n");
    CHECK(run("validate --config " + ok.string()) == 0);
    const auto broken = write_conf("broken.conf", "horizon = 500\ndim = 4\ndebug.corrupt_inverse = 0.5\n");
    CHECK(run("validate --config " + broken.string()) == 2);
}

TEST_CASE("calibrate-c and clip-study run") {
    const auto conf = write_conf("cal.conf", "horizon = 300\ndim = 4\nbudget_fraction = 0.1\n");
    CHECK(run("calibrate-c --target 30 --config " + conf.string()) == 0);
    const auto clip = write_conf("clip_ok.conf",
                                 "horizon = 300\ndim = 4\nlearner.mode = sgd-ce\nlearner.kind = stacksl\n");
    const auto out = scratch() / "clip";
    REQUIRE(run("clip-study --config " + clip.string() + " --out " + out.string()) == 0);
    CHECK(fs::exists(out / "clip_study.csv"));
}
