#include "cli.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "esas/entities.hpp"
#include "esas/errors.hpp"

namespace esas::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using entities::Workspace;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("cannot write " + path);
}

std::unique_ptr<RandomSource> make_rng(const std::optional<std::string>& seed) {
  if (seed) return std::make_unique<SeededRandom>(*seed);
  return std::make_unique<SystemRandom>();
}

Workspace open_workspace(const std::string& path) {
  return Workspace::open(std::make_unique<DirectoryStore>(path));
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

json to_json(const std::set<std::string>& s) { return json(std::vector<std::string>(s.begin(), s.end())); }

// Option values shared between subcommands; CLI11 binds into these.
struct Args {
  std::string workspace;
  std::optional<std::string> seed;

  std::size_t capacity = 0;
  int security_level = 128;

  std::string role;
  std::string id;
  std::string attrs;
  std::string export_path;

  std::string owner;
  std::string input;
  std::string policy;
  std::string mode = "theme";
  std::string triples;

  std::string user;
  std::string query;
  std::size_t k = 0;
  std::string out_dir;
  bool recompute = false;
  std::string key_file;

  std::string document;
  std::string out_path;
  std::string record_file;
};

void add_common(CLI::App* sub, Args& a, bool seeded) {
  sub->add_option("--workspace,-w", a.workspace, "Workspace directory")->envname("ESAS_WORKSPACE")->required();
  if (seeded) sub->add_option("--seed", a.seed, "Deterministic randomness seed (testing only)");
}

json cmd_setup(const Args& a) {
  auto rng = make_rng(a.seed);
  auto ws = Workspace::create(std::make_unique<DirectoryStore>(a.workspace), a.capacity, a.security_level, *rng);
  const auto& ctx = ws.params().context;
  return {{"command", "setup"},
          {"workspace", a.workspace},
          {"capacity", a.capacity},
          {"security_level", ctx.security_level},
          {"curve", ctx.curve}};
}

json cmd_register(const Args& a) {
  auto ws = open_workspace(a.workspace);
  if (a.role == "owner") {
    if (!a.attrs.empty()) throw InvalidArgument("owners take no --attrs");
    entities::kgc::register_owner(ws, a.id);
    return {{"command", "register"}, {"role", "owner"}, {"id", a.id}};
  }
  const auto list = split_list(a.attrs);
  const cpabe::AttributeSet attrs(list.begin(), list.end());
  for (const auto& at : attrs) {
    if (!cpabe::is_valid_attribute(at)) throw InvalidArgument("invalid attribute '" + at + "'");
  }
  auto rng = make_rng(a.seed);
  const auto creds = entities::kgc::register_user(ws, a.id, attrs, *rng);
  std::string key_file = (fs::path(a.workspace) / "users" / (a.id + ".key")).string();
  if (!a.export_path.empty()) {
    write_file(a.export_path, creds.to_envelope());
    fs::permissions(a.export_path, fs::perms::owner_read | fs::perms::owner_write);
    key_file = a.export_path;
  }
  const auto lists = ws.authorization_lists();
  return {{"command", "register"},
          {"role", "user"},
          {"id", a.id},
          {"attributes", to_json(attrs)},
          {"key_file", key_file},
          {"authorized_documents", to_json(lists.at(a.id))}};
}

json cmd_ingest(const Args& a) {
  auto ws = open_workspace(a.workspace);
  entities::owner::IngestRequest req;
  req.owner_id = a.owner;
  const auto doc = read_file(a.input);
  req.document.assign(doc.begin(), doc.end());
  if (!a.triples.empty()) req.triples = semantic::parse_triple_file(read_file(a.triples));
  req.policy = a.policy;
  req.mode = semantic::parse_mode(a.mode);
  auto rng = make_rng(a.seed);
  const auto id = entities::owner::ingest(ws, req, *rng);
  const auto vocab = ws.vocabulary();
  return {{"command", "ingest"},
          {"document_id", id},
          {"owner", a.owner},
          {"policy", cpabe::parse_policy(a.policy).to_string()},
          {"mode", semantic::to_string(req.mode)},
          {"vocabulary_version", vocab.version()},
          {"vocabulary_size", vocab.size()}};
}

entities::UserCredentials load_credentials(const Workspace& ws, const Args& a) {
  if (!a.key_file.empty()) {
    auto creds = entities::UserCredentials::from_envelope(read_file(a.key_file));
    if (creds.id != a.user) throw InvalidArgument("key file belongs to '" + creds.id + "', not '" + a.user + "'");
    return creds;
  }
  return ws.credentials(a.user);
}

json cmd_query(const Args& a) {
  if (a.k == 0) throw InvalidArgument("k must be at least 1");
  auto ws = open_workspace(a.workspace);
  const auto creds = load_credentials(ws, a);
  auto rng = make_rng(a.seed);
  const auto source = a.recompute ? entities::ams::ListSource::Recompute : entities::ams::ListSource::Precomputed;
  const auto hits = entities::du::query(ws, creds, a.query, a.k, *rng, source);

  json results = json::array();
  if (!a.out_dir.empty()) fs::create_directories(a.out_dir);
  for (std::size_t i = 0; i < hits.size(); ++i) {
    json r = {{"rank", i + 1}, {"document_id", hits[i].id}, {"score", hits[i].score.get_str()}};
    if (!a.out_dir.empty()) {
      const auto path = (fs::path(a.out_dir) / (hits[i].id + ".env")).string();
      write_file(path, ws.document(hits[i].id).to_envelope());
      r["record_file"] = path;
    }
    results.push_back(std::move(r));
  }
  return {{"command", "query"}, {"user", a.user}, {"k", a.k}, {"results", std::move(results)}};
}

json cmd_decrypt(const Args& a) {
  auto ws = open_workspace(a.workspace);
  const auto creds = load_credentials(ws, a);
  const auto record = a.record_file.empty() ? ws.document(a.document)
                                            : entities::DocumentRecord::from_envelope(read_file(a.record_file));
  if (record.id != a.document) {
    throw InvalidArgument("record file holds '" + record.id + "', not '" + a.document + "'");
  }
  const auto plain = entities::du::decrypt(record, creds.key);
  write_file(a.out_path, std::string_view(reinterpret_cast<const char*>(plain.data()), plain.size()));
  return {{"command", "decrypt"}, {"document_id", a.document}, {"out", a.out_path}, {"bytes", plain.size()}};
}

json cmd_refresh(const Args& a) {
  auto ws = open_workspace(a.workspace);
  const auto lists = entities::ams::refresh(ws);
  json j = json::object();
  for (const auto& [user, docs] : lists) j[user] = to_json(docs);
  return {{"command", "refresh"}, {"lists", std::move(j)}};
}

json cmd_inspect(const Args& a) {
  auto ws = open_workspace(a.workspace);
  const auto vocab = ws.vocabulary();
  const auto lists = ws.authorization_lists();
  json owners = json::array();
  for (const auto& id : ws.owners()) owners.push_back({{"id", id}, {"documents", ws.owner(id).documents}});
  json users = json::array();
  for (const auto& id : ws.users()) {
    auto it = lists.find(id);
    users.push_back({{"id", id},
                     {"attributes", to_json(ws.user(id).attributes)},
                     {"authorized_documents", it == lists.end() ? json::array() : to_json(it->second)}});
  }
  json docs = json::array();
  for (const auto& id : ws.documents()) {
    const auto ck = ws.ams_ciphertext(id);
    docs.push_back({{"id", id}, {"policy", ck.tree.to_string()}});
  }
  const auto& ctx = ws.params().context;
  return {{"command", "inspect"},
          {"curve", ctx.curve},
          {"security_level", ctx.security_level},
          {"capacity", vocab.capacity()},
          {"vocabulary", {{"version", vocab.version()}, {"size", vocab.size()}, {"documents", vocab.document_count()}}},
          {"owners", std::move(owners)},
          {"users", std::move(users)},
          {"documents", std::move(docs)}};
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const InvalidArgument*>(&e)) return kUsage;
  if (dynamic_cast<const ProtocolError*>(&e)) return kProtocol;
  if (dynamic_cast<const IoError*>(&e) || dynamic_cast<const FormatError*>(&e)) return kIo;
  if (dynamic_cast<const std::filesystem::filesystem_error*>(&e)) return kIo;
  return kProtocol;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Attribute-based semantic search over encrypted documents", "esas"};
  app.require_subcommand(1);
  Args a;

  auto* setup = app.add_subcommand("setup", "Create a workspace: system parameters, master secret, KNN key");
  add_common(setup, a, true);
  setup->add_option("--capacity,-n", a.capacity, "Vocabulary capacity (vector dimension)")->required();
  setup->add_option("--security-level", a.security_level, "Security level in bits")->capture_default_str();

  auto* reg = app.add_subcommand("register", "Register a data owner or data user");
  add_common(reg, a, true);
  reg->add_option("role", a.role, "owner or user")->required()->check(CLI::IsMember({"owner", "user"}));
  reg->add_option("id", a.id, "Identifier")->required();
  reg->add_option("--attrs", a.attrs, "Comma-separated attributes (users only)");
  reg->add_option("--export", a.export_path, "Also write the user's credentials here");

  auto* ingest = app.add_subcommand("ingest", "Outsource a document");
  add_common(ingest, a, true);
  ingest->add_option("--owner", a.owner, "Owner id")->required();
  ingest->add_option("--input,-i", a.input, "Document file")->required();
  ingest->add_option("--policy,-p", a.policy, "Access policy, e.g. and(doctor, cardiology)")->required();
  ingest->add_option("--mode", a.mode, "theme or all")->capture_default_str();
  ingest->add_option("--triples", a.triples, "TAB-separated triple file used instead of extraction");

  auto* query = app.add_subcommand("query", "Ranked search as a data user");
  add_common(query, a, true);
  query->add_option("--user,-u", a.user, "User id")->required();
  query->add_option("--query,-q", a.query, "Query text")->required();
  query->add_option("-k", a.k, "Number of results")->required();
  query->add_option("--key", a.key_file, "Exported credentials (default: the workspace copy)");
  query->add_option("--out", a.out_dir, "Write retrieved records into this directory");
  query->add_flag("--recompute", a.recompute, "Recompute the authorization list instead of using the stored one");

  auto* decrypt = app.add_subcommand("decrypt", "Decrypt a document as a data user");
  add_common(decrypt, a, false);
  decrypt->add_option("--user,-u", a.user, "User id")->required();
  decrypt->add_option("--document,-d", a.document, "Document id")->required();
  decrypt->add_option("--out,-o", a.out_path, "Plaintext output file")->required();
  decrypt->add_option("--key", a.key_file, "Exported credentials (default: the workspace copy)");
  decrypt->add_option("--record", a.record_file, "Record file written by query --out");

  auto* refresh = app.add_subcommand("refresh", "Recompute every authorization list");
  add_common(refresh, a, false);

  auto* inspect = app.add_subcommand("inspect", "Print public workspace metadata");
  add_common(inspect, a, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o;
    std::ostringstream d;
    const int code = app.exit(e, o, d);
    out << o.str();
    err << d.str();
    return code == 0 ? kOk : kUsage;
  }

  try {
    json result;
    if (*setup) result = cmd_setup(a);
    else if (*reg) result = cmd_register(a);
    else if (*ingest) result = cmd_ingest(a);
    else if (*query) result = cmd_query(a);
    else if (*decrypt) result = cmd_decrypt(a);
    else if (*refresh) result = cmd_refresh(a);
    else result = cmd_inspect(a);
    out << result.dump(2) << '\n';
    return kOk;
  } catch (const std::exception& e) {
    err << "esas: error: " << e.what() << '\n';
    return exit_code_for(e);
  }
}

}  // namespace esas::cli
