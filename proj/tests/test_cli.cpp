#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "cli.hpp"
#include "esas/entities.hpp"
#include "esas/errors.hpp"
#include "support.hpp"

using namespace esas;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
  json j() const { return json::parse(out); }
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "esas");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

void write(const fs::path& p, const std::string& s) {
  std::ofstream(p, std::ios::binary) << s;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = slurp(e.path());
  }
  return out;
}

class CliTest : public ::testing::Test {
 protected:
  testkit::TempDir dir;
  std::string ws = dir.str("ws");

  void SetUp() override {
    ASSERT_EQ(cli({"setup", "-w", ws, "-n", "16", "--seed", "s"}).code, 0);
    ASSERT_EQ(cli({"register", "owner", "hosp", "-w", ws}).code, 0);
    ASSERT_EQ(cli({"register", "user", "alice", "-w", ws, "--attrs", "doctor,cardiology"}).code, 0);
    ASSERT_EQ(cli({"register", "user", "bob", "-w", ws, "--attrs", "nurse"}).code, 0);
    write(dir.path() / "doc.txt", "Amy is going to London by train.");
  }

  std::string ingest(const std::string& policy) {
    const auto r = cli({"ingest", "-w", ws, "--owner", "hosp", "-i", dir.str("doc.txt"), "-p", policy});
    EXPECT_EQ(r.code, 0) << r.err;
    return r.j()["document_id"];
  }
};

TEST_F(CliTest, SetupOutput) {
  const auto r = cli({"inspect", "-w", ws});
  ASSERT_EQ(r.code, 0);
  const auto j = r.j();
  EXPECT_EQ(j["capacity"], 16);
  EXPECT_EQ(j["security_level"], 128);
  EXPECT_EQ(j["owners"].size(), 1u);
  EXPECT_EQ(j["users"].size(), 2u);
}

TEST_F(CliTest, SetupTwiceIsIoError) {
  const auto r = cli({"setup", "-w", ws, "-n", "16"});
  EXPECT_EQ(r.code, cli::kIo);
  EXPECT_NE(r.err.find("esas: error:"), std::string::npos);
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(cli({}).code, cli::kUsage);
  EXPECT_EQ(cli({"frobnicate"}).code, cli::kUsage);
  EXPECT_EQ(cli({"setup", "-w", dir.str("other")}).code, cli::kUsage);
  EXPECT_EQ(cli({"setup", "-w", dir.str("other"), "-n", "4", "--security-level", "80"}).code, cli::kUsage);
  EXPECT_EQ(cli({"register", "admin", "x", "-w", ws}).code, cli::kUsage);
  EXPECT_EQ(cli({"register", "user", "carol", "-w", ws}).code, cli::kUsage);
  EXPECT_EQ(cli({"register", "owner", "o2", "-w", ws, "--attrs", "a"}).code, cli::kUsage);
  EXPECT_EQ(cli({"register", "user", "carol", "-w", ws, "--attrs", "bad attr"}).code, cli::kUsage);
  EXPECT_EQ(cli({"query", "-w", ws, "-u", "alice", "-q", "x", "-k", "0"}).code, cli::kUsage);
  EXPECT_EQ(cli({"--help"}).code, cli::kOk);
}

TEST_F(CliTest, DuplicateRegistrationIsProtocolError) {
  EXPECT_EQ(cli({"register", "owner", "hosp", "-w", ws}).code, cli::kProtocol);
  EXPECT_EQ(cli({"register", "user", "alice", "-w", ws, "--attrs", "x"}).code, cli::kProtocol);
}

TEST_F(CliTest, PolicySyntaxErrorReportsPosition) {
  const auto r = cli({"ingest", "-w", ws, "--owner", "hosp", "-i", dir.str("doc.txt"), "-p", "and(doctor,"});
  EXPECT_EQ(r.code, cli::kUsage);
  EXPECT_NE(r.err.find("11"), std::string::npos) << r.err;
}

TEST_F(CliTest, MissingInputIsIoError) {
  EXPECT_EQ(cli({"ingest", "-w", ws, "--owner", "hosp", "-i", dir.str("nope.txt"), "-p", "a"}).code, cli::kIo);
  EXPECT_EQ(cli({"inspect", "-w", dir.str("missing")}).code, cli::kIo);
}

TEST_F(CliTest, IngestQueryDecrypt) {
  const auto doc = ingest("and(doctor, cardiology)");
  const auto q = cli({"query", "-w", ws, "-u", "alice", "-q", "Amy is going to London", "-k", "3", "--out",
                      dir.str("hits")});
  ASSERT_EQ(q.code, 0) << q.err;
  const auto j = q.j();
  ASSERT_EQ(j["results"].size(), 1u);
  EXPECT_EQ(j["results"][0]["document_id"], doc);
  EXPECT_EQ(j["results"][0]["rank"], 1);
  const std::string record = j["results"][0]["record_file"];

  const auto d = cli({"decrypt", "-w", ws, "-u", "alice", "-d", doc, "-o", dir.str("plain.txt"), "--record", record});
  ASSERT_EQ(d.code, 0) << d.err;
  EXPECT_EQ(slurp(dir.path() / "plain.txt"), "Amy is going to London by train.");

  const auto bq = cli({"query", "-w", ws, "-u", "bob", "-q", "Amy is going to London", "-k", "3"});
  ASSERT_EQ(bq.code, 0);
  EXPECT_TRUE(bq.j()["results"].empty());

  const auto bd = cli({"decrypt", "-w", ws, "-u", "bob", "-d", doc, "-o", dir.str("bob.txt")});
  EXPECT_EQ(bd.code, cli::kProtocol);
  EXPECT_NE(bd.err.find("access tree unsatisfied"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir.path() / "bob.txt"));

  EXPECT_EQ(cli({"decrypt", "-w", ws, "-u", "alice", "-d", "hosp-999999", "-o", dir.str("x")}).code, cli::kProtocol);
}

TEST_F(CliTest, ExportedKeyAndRecompute) {
  ingest("or(nurse, doctor)");
  ASSERT_EQ(cli({"register", "user", "carol", "-w", ws, "--attrs", "nurse", "--export", dir.str("carol.key")}).code,
            0);
  EXPECT_EQ(fs::status(dir.path() / "carol.key").permissions() & fs::perms::others_all, fs::perms::none);
  const auto a = cli({"query", "-w", ws, "-u", "carol", "-q", "Amy", "-k", "2", "--key", dir.str("carol.key")});
  const auto b = cli({"query", "-w", ws, "-u", "carol", "-q", "Amy", "-k", "2", "--recompute"});
  ASSERT_EQ(a.code, 0);
  ASSERT_EQ(b.code, 0);
  EXPECT_EQ(a.j()["results"][0]["document_id"], b.j()["results"][0]["document_id"]);
  EXPECT_EQ(cli({"query", "-w", ws, "-u", "alice", "-q", "Amy", "-k", "2", "--key", dir.str("carol.key")}).code,
            cli::kUsage);
}

TEST_F(CliTest, TripleFileAndRefresh) {
  write(dir.path() / "t.tsv", "go\tagent\tamy\ngo\tdest\tparis\n");
  const auto r = cli({"ingest", "-w", ws, "--owner", "hosp", "-i", dir.str("doc.txt"), "-p", "nurse", "--triples",
                      dir.str("t.tsv"), "--mode", "all"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.j()["vocabulary_size"], 2);
  write(dir.path() / "bad.tsv", "go\tagent\n");
  EXPECT_EQ(cli({"ingest", "-w", ws, "--owner", "hosp", "-i", dir.str("doc.txt"), "-p", "nurse", "--triples",
                 dir.str("bad.tsv")})
                .code,
            cli::kIo);

  const auto f = cli({"refresh", "-w", ws});
  ASSERT_EQ(f.code, 0);
  EXPECT_EQ(f.j()["lists"]["bob"], json::array({r.j()["document_id"]}));
  EXPECT_TRUE(f.j()["lists"]["alice"].empty());
}

// A seeded CLI session writes exactly the files the library writes given the
// same per-command seeds.
TEST(CliDeterminism, MatchesLibrary) {
  testkit::TempDir dir;
  write(dir.path() / "doc.txt", "Bob drove his car to Paris. Amy is going to London by train.");

  const auto a = dir.str("cli");
  ASSERT_EQ(cli({"setup", "-w", a, "-n", "12", "--seed", "one"}).code, 0);
  ASSERT_EQ(cli({"register", "owner", "o", "-w", a}).code, 0);
  ASSERT_EQ(cli({"register", "user", "u", "-w", a, "--attrs", "x,y", "--seed", "two"}).code, 0);
  ASSERT_EQ(cli({"ingest", "-w", a, "--owner", "o", "-i", dir.str("doc.txt"), "-p", "or(x, z)", "--mode", "all",
                 "--seed", "three"})
                .code,
            0);

  const auto b = dir.str("lib");
  {
    using namespace esas::entities;
    SeededRandom r1("one");
    auto ws = Workspace::create(std::make_unique<DirectoryStore>(b), 12, 128, r1);
    kgc::register_owner(ws, "o");
    SeededRandom r2("two");
    kgc::register_user(ws, "u", {"x", "y"}, r2);
    SeededRandom r3("three");
    const auto text = slurp(dir.path() / "doc.txt");
    owner::ingest(ws, {"o", Bytes(text.begin(), text.end()), std::nullopt, "or(x, z)",
                       semantic::ExtractionMode::AllSentences},
                  r3);
  }
  const auto sa = snapshot(a);
  const auto sb = snapshot(b);
  EXPECT_EQ(sa.size(), sb.size());
  EXPECT_EQ(sa, sb);
}

TEST(CliExitCodes, Mapping) {
  EXPECT_EQ(cli::exit_code_for(InvalidArgument("x")), cli::kUsage);
  EXPECT_EQ(cli::exit_code_for(ProtocolError("x")), cli::kProtocol);
  EXPECT_EQ(cli::exit_code_for(AuthenticationError("x")), cli::kProtocol);
  EXPECT_EQ(cli::exit_code_for(IoError("x")), cli::kIo);
  EXPECT_EQ(cli::exit_code_for(FormatError("x")), cli::kIo);
  EXPECT_EQ(cli::exit_code_for(std::runtime_error("x")), cli::kProtocol);
}

}  // namespace
