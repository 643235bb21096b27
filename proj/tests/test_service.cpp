#include <doctest.h>

#include <chrono>
#include <httplib.h>
#include <json.hpp>
#include <thread>

#include "corpus.hpp"
#include "gridshed/service.hpp"

using namespace gridshed;
using nlohmann::json;

namespace {

std::string upload_body(const std::filesystem::path& dir, const std::string& name) {
  json body;
  body["case"] = json::parse(read_text_file(dir / (name + ".case.json")));
  body["risk"] = json::parse(read_text_file(dir / (name + ".risk.json")));
  return body.dump();
}

std::string upload_corpus(Service& service, const std::string& name) {
  const auto r = service.handle("POST", "/cases", upload_body(corpus::data_dir() / "corpus", name));
  REQUIRE(r.status == 201);
  return json::parse(r.body)["case_id"].get<std::string>();
}

json post(Service& service, const std::string& path, const json& body, int expected) {
  const auto r = service.handle("POST", path, body.dump());
  CHECK(r.status == expected);
  return json::parse(r.body);
}

json wait_for_sweep(Service& service, const std::string& id) {
  for (int i = 0; i < 600; ++i) {
    const auto r = service.handle("GET", "/sweeps/" + id, "");
    REQUIRE(r.status == 200);
    auto j = json::parse(r.body);
    if (j["status"] != "running") return j;
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
  FAIL("sweep did not finish");
  return {};
}

}  // namespace

TEST_CASE("uploading the bundled case returns a new id each time") {
  Service service;
  const auto body = upload_body(corpus::data_dir() / "rts73", "rts73");
  const auto a = service.handle("POST", "/cases", body);
  const auto b = service.handle("POST", "/cases", body);
  REQUIRE(a.status == 201);
  REQUIRE(b.status == 201);
  const auto ja = json::parse(a.body), jb = json::parse(b.body);
  CHECK(ja["case_id"] != jb["case_id"]);
  CHECK(ja["summary"]["buses"] == 73);
  const auto got = service.handle("GET", "/cases/" + ja["case_id"].get<std::string>(), "");
  CHECK(got.status == 200);
  CHECK(json::parse(got.body)["case"]["lines"].size() == 120);
}

TEST_CASE("uploading a case with a dangling reference lists the violation") {
  Service service;
  auto body = json::parse(upload_body(corpus::data_dir() / "corpus", "triangle"));
  body["case"]["lines"][0]["to_bus"] = 99;
  const auto r = service.handle("POST", "/cases", body.dump());
  CHECK(r.status == 400);
  const auto j = json::parse(r.body);
  REQUIRE(j["violations"].size() >= 1);
  CHECK(j["violations"][0]["entity"] == "line");
  CHECK(j["violations"][0]["message"].get<std::string>().find("99") != std::string::npos);
  CHECK(service.handle("POST", "/cases", "{").status == 400);
  CHECK(service.handle("POST", "/cases", R"({"case": {}})").status == 400);
}

TEST_CASE("solve at alpha zero serves the whole demand") {
  Service service;
  const auto id = upload_corpus(service, "triangle");
  const auto j = post(service, "/cases/" + id + "/solve", {{"alpha", 0.0}}, 200);
  const auto c = corpus::small("triangle");
  CHECK(j["d_tot_mw"].get<double>() == doctest::Approx(c.network.total_demand_mw()));
  CHECK(j["evaluation"]["max_balance_residual_mw"].get<double>() <= 1e-6);
  CHECK(j["evaluation"]["max_limit_violation_mw"].get<double>() <= 1e-6);
  CHECK(j["islands"].size() == 1);
}

TEST_CASE("pinned components come back in the pinned state") {
  Service service;
  const auto id = upload_corpus(service, "ring5");
  for (const json& pins : {json::array({"line:1:off"}), json::array({{{"kind", "line"}, {"id", 2}, {"state", "off"}},
                                                                     {{"kind", "bus"}, {"id", 3}, {"state", "on"}}})}) {
    const auto j = post(service, "/cases/" + id + "/solve", {{"alpha", 0.3}, {"pins", pins}}, 200);
    REQUIRE(j["pins"].size() == pins.size());
    for (const auto& p : j["pins"]) {
      const auto pin = parse_pin(p.get<std::string>());
      const char* section = pin.component.kind == ComponentKind::line ? "lines" : "buses";
      bool seen = false;
      for (const auto& row : j[section]) {
        if (row["id"] == pin.component.id) {
          seen = true;
          CHECK(row["on"].get<bool>() == (pin.state == PinState::force_on));
        }
      }
      CHECK(seen);
    }
    CHECK(j["evaluation"]["violations"].empty());
  }
  const auto first = post(service, "/cases/" + id + "/solve", {{"alpha", 0.3}, {"pins", {"line:1:off"}}}, 200);
  CHECK(first["pins"][0] == "line:1:off");
}

TEST_CASE("solve errors map to status codes") {
  Service service;
  const auto id = upload_corpus(service, "triangle");
  const auto path = "/cases/" + id + "/solve";
  post(service, "/cases/c999/solve", {{"alpha", 0.1}}, 404);
  post(service, path, {{"alpha", 1.5}}, 422);
  post(service, path, json::object(), 422);
  post(service, path, {{"alpha", 0.1}, {"pins", {"line:42:off"}}}, 422);
  post(service, path, {{"alpha", 0.1}, {"pins", {"line:one:off"}}}, 422);
  post(service, path, {{"alpha", 0.1}, {"backend", "nope"}}, 422);
  const auto j = post(service, path, {{"alpha", 0.1}, {"pins", {"line:1:on", "bus:2:off"}}}, 409);
  CHECK(j["error"].get<std::string>().find("line") != std::string::npos);
  CHECK(service.handle("GET", "/nowhere", "").status == 404);
  CHECK(service.handle("GET", "/cases/" + id + "/solve", "").status == 405);
}

TEST_CASE("stored solutions are immutable and optionally persisted") {
  const auto dir = std::filesystem::temp_directory_path() / "gridshed-service-test";
  std::filesystem::remove_all(dir);
  ServiceOptions options;
  options.plan_dir = dir;
  Service service(options);
  const auto id = upload_corpus(service, "diamond");
  const auto j = post(service, "/cases/" + id + "/solve", {{"alpha", 0.2}}, 200);
  const auto sid = j["solution_id"].get<std::string>();
  const auto a = service.handle("GET", "/cases/" + id + "/solutions/" + sid, "");
  post(service, "/cases/" + id + "/solve", {{"alpha", 0.7}}, 200);
  const auto b = service.handle("GET", "/cases/" + id + "/solutions/" + sid, "");
  CHECK(a.status == 200);
  CHECK(a.body == b.body);
  CHECK(json::parse(a.body)["alpha"] == 0.2);
  CHECK(read_text_file(dir / id / (sid + ".plan.json")) == a.body);
  CHECK(service.handle("GET", "/cases/" + id + "/solutions/p999", "").status == 404);
  const auto listed = json::parse(service.handle("GET", "/cases/" + id, "").body);
  CHECK(listed["solutions"].size() == 2);
  std::filesystem::remove_all(dir);
}

TEST_CASE("default alpha sweep job finishes with 101 points") {
  Service service;
  const auto id = upload_corpus(service, "triangle");
  const auto started = post(service, "/cases/" + id + "/sweeps", {{"method", "ops"}}, 202);
  const auto done = wait_for_sweep(service, started["sweep_id"].get<std::string>());
  REQUIRE(done["status"] == "done");
  CHECK(done["progress"] == 1.0);
  CHECK(done["result"]["points"].size() == 101);
  CHECK(done["result"]["failed_points"] == 0);
  CHECK(done["result"]["pareto_front"].size() >= 2);
}

TEST_CASE("polling a sweep before it finishes reports progress") {
  ServiceOptions options;
  options.workers = 1;
  Service service(options);
  const auto body = upload_body(corpus::data_dir() / "perf", "case14");
  const auto up = service.handle("POST", "/cases", body);
  REQUIRE(up.status == 201);
  const auto id = json::parse(up.body)["case_id"].get<std::string>();
  json grid = json::array();
  for (int i = 0; i < 20; ++i) grid.push_back(i / 20.0);
  const auto started = post(service, "/cases/" + id + "/sweeps", {{"grid", grid}}, 202);
  const auto sid = started["sweep_id"].get<std::string>();
  const auto early = json::parse(service.handle("GET", "/sweeps/" + sid, "").body);
  CHECK(early["status"] == "running");
  CHECK(early["progress"].get<double>() >= 0.0);
  CHECK(early["progress"].get<double>() < 1.0);
  const auto done = wait_for_sweep(service, sid);
  CHECK(done["status"] == "done");
  CHECK(done["result"]["points"].size() == 20);
}

TEST_CASE("threshold sweep jobs and sweep errors") {
  Service service;
  const auto id = upload_corpus(service, "bowtie");
  const auto started = post(service, "/cases/" + id + "/sweeps", {{"method", "transmission"}}, 202);
  const auto done = wait_for_sweep(service, started["sweep_id"].get<std::string>());
  CHECK(done["status"] == "done");
  CHECK(done["method"] == "transmission");
  CHECK(service.handle("GET", "/sweeps/s999", "").status == 404);
  post(service, "/cases/c999/sweeps", json::object(), 404);
  post(service, "/cases/" + id + "/sweeps", {{"method", "bogus"}}, 422);
  post(service, "/cases/" + id + "/sweeps", {{"grid", {0.5, 2.0}}}, 422);
  post(service, "/cases/" + id + "/sweeps", {{"grid", json::array()}}, 422);
}

TEST_CASE("routes are served over HTTP") {
  Service service;
  const int port = service.start_background("127.0.0.1");
  REQUIRE(port > 0);
  httplib::Client client("127.0.0.1", port);
  const auto up = client.Post("/cases", upload_body(corpus::data_dir() / "corpus", "two_bus"), "application/json");
  REQUIRE(up);
  CHECK(up->status == 201);
  const auto id = json::parse(up->body)["case_id"].get<std::string>();
  const auto solved = client.Post("/cases/" + id + "/solve", R"({"alpha": 0.0})", "application/json");
  REQUIRE(solved);
  CHECK(solved->status == 200);
  const auto sid = json::parse(solved->body)["solution_id"].get<std::string>();
  const auto a = client.Get("/cases/" + id + "/solutions/" + sid);
  const auto b = client.Get("/cases/" + id + "/solutions/" + sid);
  REQUIRE(a);
  REQUIRE(b);
  CHECK(a->body == b->body);
  const auto missing = client.Get("/sweeps/s404");
  REQUIRE(missing);
  CHECK(missing->status == 404);
  service.stop();
}
