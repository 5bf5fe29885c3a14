// Copyright 2026 The vqar Authors
// SPDX-License-Identifier: Apache-2.0

// C API and CLI behavior. Core headers are used only to build fixtures.

#include <doctest.h>

#include <cmath>
#include <sys/wait.h>

#include <vqar/vqar.h>

#include "support.hpp"

using namespace vqar;
using namespace vqar::testing;
using nlohmann::json;

namespace {

struct CliResult {
    int code = -1;
    std::string out;
    std::string err;
};

CliResult run_cli(const TempDir& dir, const std::string& args) {
    const fs::path out = dir / "stdout.txt", err = dir / "stderr.txt";
    const std::string cmd = std::string(VQAR_CLI_PATH) + " " + args + " >" + out.string() + " 2>" + err.string();
    const int status = std::system(cmd.c_str());
    CliResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = files::read_text(out);
    r.err = files::read_text(err);
    return r;
}

std::string take(char* s) {
    std::string out = s ? s : "";
    vqar_string_free(s);
    return out;
}

// Writes a config file next to the mock script and returns its path.
fs::path write_config(const TempDir& dir, const MockScript& script, PipelineMode mode) {
    const PipelineConfig cfg = mock_config(dir.path(), script, mode);
    const fs::path path = dir / "config.json";
    files::write_atomic(path, config_to_json(cfg).dump(2));
    return path;
}

std::string record_line(const QARecord& r, const std::string& image_name) {
    return json{{"id", r.id}, {"image_path", image_name}, {"question", r.question}, {"qtype", "open"}, {"gold", r.gold}}
               .dump() +
           "\n";
}

}  // namespace

TEST_CASE("C API basics") {
    CHECK(vqar_abi_version() == VQAR_ABI_VERSION);
    CHECK(std::string(vqar_status_string(VQAR_OK)) == "Ok");
    CHECK(std::string(vqar_status_string(VQAR_SCRIPT_MISS)) == "ScriptMiss");
    CHECK(vqar_binary_entropy(0.5) == doctest::Approx(0.693147180559945309417));
    CHECK(std::isnan(vqar_binary_entropy(1.5)));

    const char* gold[] = {"two", "two", "2", "3", "3", "3", "3", "3", "3", "3"};
    double s = 0.0;
    CHECK(vqar_score_vqa_soft("two", gold, 10, &s) == VQAR_OK);
    CHECK(s == doctest::Approx(0.6));
    CHECK(vqar_score_vqa_soft(nullptr, gold, 10, &s) == VQAR_INVALID_ARGUMENT);

    vqar_pipeline* p = nullptr;
    CHECK(vqar_pipeline_create_json(R"({"gate": {"n_samples": 5}})", nullptr, &p) == VQAR_OK);
    REQUIRE(p);
    char* cfg = nullptr;
    CHECK(vqar_pipeline_config(p, &cfg) == VQAR_OK);
    CHECK(json::parse(take(cfg)).at("gate").at("n_samples") == 5);
    vqar_pipeline_destroy(p);

    p = nullptr;
    CHECK(vqar_pipeline_create_json(R"({"bogus": 1})", nullptr, &p) == VQAR_CONFIG);
    CHECK(p == nullptr);
    CHECK(std::string(vqar_last_error()).find("bogus") != std::string::npos);
    CHECK(vqar_pipeline_create_json("{", nullptr, &p) == VQAR_CONFIG);
    const char* sets[] = {"gate.strategy=nope"};
    CHECK(vqar_pipeline_create(nullptr, sets, 1, &p) == VQAR_CONFIG);
    vqar_pipeline_destroy(nullptr);
}

TEST_CASE("C API ask through a mock pipeline") {
    TempDir dir;
    const std::string img = write_png(dir / "a.png").string();
    const QARecord r = open_record("ask", img, "What animal?");
    ScriptBuilder sb;
    sb.gate_texts(r.question, {"Answerable", "Answerable", "Answerable"}).answer(r, "cat");
    const fs::path cfg = write_config(dir, sb.script, PipelineMode::Focus);

    vqar_pipeline* p = nullptr;
    REQUIRE(vqar_pipeline_create(cfg.c_str(), nullptr, 0, &p) == VQAR_OK);
    char* trace = nullptr;
    REQUIRE(vqar_ask(p, img.c_str(), r.question.c_str(), &trace) == VQAR_OK);
    const json t = json::parse(take(trace));
    CHECK(t.at("route") == "FastIntuition");
    CHECK(t.at("final_answer") == "cat");

    char* gate = nullptr;
    REQUIRE(vqar_gate(p, img.c_str(), r.question.c_str(), &gate) == VQAR_OK);
    CHECK(json::parse(take(gate)).at("calls") == 3);

    CHECK(vqar_ask(p, (dir / "none.png").c_str(), "q?", &trace) == VQAR_MISSING_IMAGE);
    CHECK(vqar_ask(p, img.c_str(), "", &trace) == VQAR_INVALID_ARGUMENT);
    CHECK(vqar_ask(nullptr, img.c_str(), "q", &trace) == VQAR_INVALID_ARGUMENT);
    vqar_pipeline_destroy(p);
}

TEST_CASE("CLI run: valid manifest, bad line, unreachable backend") {
    TempDir dir;
    write_png(dir / "a.png");
    std::vector<QARecord> rs = {open_record("1", (dir / "a.png").string(), "First?"),
                                open_record("2", (dir / "a.png").string(), "Second?")};
    ScriptBuilder sb;
    for (const auto& r : rs) sb.gate_texts(r.question, {"Answerable", "Answerable", "Answerable"}).answer(r, "cat");
    const fs::path cfg = write_config(dir, sb.script, PipelineMode::Focus);
    files::write_atomic(dir / "m.jsonl", record_line(rs[0], "a.png") + record_line(rs[1], "a.png"));

    CliResult res = run_cli(dir, "run --config " + cfg.string() + " --manifest " + (dir / "m.jsonl").string() +
                                     " --output_dir " + (dir / "out").string());
    CHECK(res.code == 0);
    CHECK(fs::exists(dir / "out" / "traces.jsonl"));
    const json rep = json::parse(files::read_text(dir / "out" / "report.json"));
    CHECK(rep.at("metrics").at("accuracy") == doctest::Approx(1.0 / 3.0));
    CHECK(rep.at("mode_counts").at("FI") == 2);

    files::write_atomic(dir / "bad.jsonl", record_line(rs[0], "a.png") + R"({"id": "2", "qtype": "open"})" "\n");
    res = run_cli(dir, "run --config " + cfg.string() + " --manifest " + (dir / "bad.jsonl").string() +
                           " --output_dir " + (dir / "bad").string());
    CHECK(res.code == 2);
    CHECK(res.err.find("bad.jsonl:2:") != std::string::npos);

    res = run_cli(dir, "run --mode only-fi --set backends.mllm.endpoint=http://127.0.0.1:1/v1/chat/completions "
                       "--set backends.mllm.retries=0 --set backends.mllm.timeout_ms=500 --manifest " +
                           (dir / "m.jsonl").string() + " --output_dir " + (dir / "down").string());
    CHECK(res.code == 3);

    res = run_cli(dir, "run --manifest");
    CHECK(res.code == 2);
    res = run_cli(dir, "run --config " + cfg.string() + " --set gate.n_samples=0 --manifest " +
                           (dir / "m.jsonl").string());
    CHECK(res.code == 2);
}

TEST_CASE("CLI ask takes both paths and rejects missing images") {
    TempDir dir;
    const std::string img = write_png(dir / "a.png").string();
    const QARecord easy = open_record("ask", img, "What color is the sky?");
    const QARecord hard = open_record("ask", img, "What number is on the jersey?");
    ScriptBuilder sb;
    sb.gate_texts(easy.question, {"Answerable", "Answerable", "Answerable"}).answer(easy, "blue");
    sb.gate_texts(hard.question, {"Answerable", "Unanswerable", "Unanswerable"})
        .keywords(hard.question, "jersey")
        .segment("jersey", {det("jersey", 0.9)})
        .answer(hard, "23");
    const fs::path cfg = write_config(dir, sb.script, PipelineMode::Focus);

    CliResult res = run_cli(dir, "ask --config " + cfg.string() + " --image " + img + " --question '" + easy.question + "'");
    REQUIRE(res.code == 0);
    json t = json::parse(res.out);
    CHECK(t.at("route") == "FastIntuition");
    CHECK(t.at("final_answer") == "blue");

    res = run_cli(dir, "ask --config " + cfg.string() + " --image " + img + " --question '" + hard.question + "'");
    REQUIRE(res.code == 0);
    t = json::parse(res.out);
    CHECK(t.at("route") == "DeliberateThinking");
    CHECK(t.at("keywords") == json::array({"jersey"}));
    CHECK(t.at("ledger").at("seg_calls") == 1);
    CHECK(t.at("final_answer") == "23");

    res = run_cli(dir, "ask --config " + cfg.string() + " --image " + (dir / "nope.png").string() + " --question 'x?'");
    CHECK(res.code == 2);

    res = run_cli(dir, "ask --config " + cfg.string() + " --mode only-fi --image " + img + " --question 'Unscripted?'");
    CHECK(res.code == 3);
}

TEST_CASE("CLI annotate") {
    TempDir dir;
    const std::string img = write_png(dir / "a.png", 80, 60).string();
    ScriptBuilder sb;
    sb.keywords("Is it sunny?", "NONE").keywords("Where is the dog?", "dog").segment("dog", {det("dog", 0.9)});
    const fs::path cfg = write_config(dir, sb.script, PipelineMode::Focus);

    CliResult res = run_cli(dir, "annotate --config " + cfg.string() + " --image " + img +
                                     " --question 'Is it sunny?' --output_dir " + (dir / "none").string());
    REQUIRE(res.code == 0);
    CHECK(files::read_bytes(dir / "none" / "annotated.png") == files::read_bytes(img));
    CHECK(json::parse(files::read_text(dir / "none" / "detections.json")).at("seg_calls") == 0);

    res = run_cli(dir, "annotate --config " + cfg.string() + " --image " + img +
                           " --question 'Where is the dog?' --output_dir " + (dir / "dog").string());
    REQUIRE(res.code == 0);
    CHECK(files::read_bytes(dir / "dog" / "annotated.png") != files::read_bytes(img));
    CHECK(json::parse(files::read_text(dir / "dog" / "detections.json")).at("detections").size() == 1);

    files::write_atomic(dir / "junk.png", "definitely not an image");
    res = run_cli(dir, "annotate --config " + cfg.string() + " --image " + (dir / "junk.png").string() +
                           " --question 'Where is the dog?' --output_dir " + (dir / "junk").string());
    CHECK(res.code == 2);
}

TEST_CASE("CLI score") {
    TempDir dir;
    write_png(dir / "a.png");
    std::vector<QARecord> rs = {open_record("1", "", "A?", {"cat"}), open_record("2", "", "B?", {"dog"})};
    files::write_atomic(dir / "m.jsonl", record_line(rs[0], "a.png") + record_line(rs[1], "a.png"));
    files::write_atomic(dir / "p.jsonl", R"({"id": "1", "prediction": "cat"})" "\n" R"({"id": "2", "prediction": "dog"})" "\n");
    CliResult res = run_cli(dir, "score --manifest " + (dir / "m.jsonl").string() + " --predictions " +
                                     (dir / "p.jsonl").string() + " --output_dir " + (dir / "s").string());
    REQUIRE(res.code == 0);
    CHECK(json::parse(res.out).at("records") == 2);
    CHECK(fs::exists(dir / "s" / "report.json"));

    files::write_atomic(dir / "empty.jsonl", "");
    res = run_cli(dir, "score --manifest " + (dir / "m.jsonl").string() + " --predictions " +
                           (dir / "empty.jsonl").string());
    CHECK(res.code == 2);
}

TEST_CASE("CLI report and compare-strategies") {
    TempDir dir;
    write_png(dir / "a.png");
    std::vector<QARecord> rs;
    std::string manifest, labels;
    ScriptBuilder sb;
    for (int i = 0; i < 4; ++i) {
        QARecord r = open_record("r" + std::to_string(i), (dir / "a.png").string(), "Q" + std::to_string(i) + "?");
        const bool hard = i % 2 == 1;
        const auto v = hard ? verdict_reply("Unanswerable", 0.05) : verdict_reply("Answerable", 0.95);
        sb.gate(r.question, {v, v, v}).answer(r, "cat", 100.0).keywords(r.question, "NONE", 20.0);
        manifest += record_line(r, "a.png");
        labels += json{{"id", r.id}, {"dt_helps", hard}, {"fi_helps", !hard}}.dump() + "\n";
        rs.push_back(r);
    }
    const fs::path cfg = write_config(dir, sb.script, PipelineMode::Focus);
    files::write_atomic(dir / "m.jsonl", manifest);
    files::write_atomic(dir / "l.jsonl", labels);

    const std::string base = " --config " + cfg.string() + " --manifest " + (dir / "m.jsonl").string();
    REQUIRE(run_cli(dir, "run" + base + " --mode only-dt --output_dir " + (dir / "dt").string()).code == 0);
    CliResult focus = run_cli(dir, "run" + base + " --output_dir " + (dir / "focus").string() + " --baseline " +
                                       (dir / "dt").string());
    INFO(focus.err);
    REQUIRE(focus.code == 0);
    const json rep = json::parse(files::read_text(dir / "focus" / "report.json"));
    CHECK(rep.at("unanswerable_proportion") == 0.5);
    CHECK(rep.at("cost").at("baseline_mode") == "only-dt");

    CliResult res = run_cli(dir, "report " + (dir / "dt").string() + " --output_dir " + (dir / "rep1").string());
    CHECK(res.code == 2);
    res = run_cli(dir, "report " + (dir / "dt").string() + " " + (dir / "focus").string() + " --output_dir " +
                           (dir / "rep").string());
    REQUIRE(res.code == 0);
    CHECK(files::read_text(dir / "rep" / "cost.svg").rfind("<svg", 0) == 0);
    CHECK(files::read_text(dir / "rep" / "proportions.md").find("50.00%") != std::string::npos);

    res = run_cli(dir, "compare-strategies" + base + " --labels " + (dir / "l.jsonl").string() + " --output_dir " +
                           (dir / "cmp").string());
    REQUIRE(res.code == 0);
    CHECK(files::read_text(dir / "cmp" / "strategies.csv") ==
          "strategy,dt,fi,corrected_dt,corrected_fi\nself_consistency,2,2,0,0\nsemantic_entropy,2,2,0,0\n"
          "consistency_entropy,2,2,0,0\n");

    files::write_atomic(dir / "short.jsonl", labels.substr(0, labels.find('\n') + 1));
    res = run_cli(dir, "compare-strategies" + base + " --labels " + (dir / "short.jsonl").string() +
                           " --output_dir " + (dir / "cmp2").string());
    CHECK(res.code == 2);
}
