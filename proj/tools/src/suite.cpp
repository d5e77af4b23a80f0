#include "suite.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "cli.hpp"
#include "json.hpp"
#include "vmmr/baseline.hpp"
#include "vmmr/kb.hpp"
#include "vmmr/pipeline.hpp"
#include "vmmr/util.hpp"

namespace vmmr::cli {

namespace fs = std::filesystem;

namespace {

struct ModelProfile {
  const char* make;
  const char* model;
  std::vector<const char*> features;
};

// Front-end cues per model. Several cues are deliberately shared between
// models so retrieval is imperfect.
const std::vector<ModelProfile>& profiles() {
  static const std::vector<ModelProfile> kProfiles = {
      {"Ferrari", "Purosangue",
       {"thin LED light strips sit high at the corners of the front",
        "a full-width black band joins the headlight units",
        "the grille opening is low and merged into the lower bumper",
        "the long bonnet has two sculpted ridges running toward the windscreen",
        "large side air intakes carry dark horizontal blades",
        "a small yellow shield badge sits on the nose",
        "the stance is a raised four-door coupe with wide wheel arches"}},
      {"Kia", "EV9",
       {"vertical stacked LED cubes form the headlight clusters",
        "a closed panel replaces the grille with a digital light pattern",
        "the boxy upright body has flat surfaces and square wheel arches",
        "a slim light bar crosses the closed panel between the headlights",
        "the lower bumper has a wide skid plate shape",
        "the bonnet is flat and high with a straight leading edge",
        "an angular badge sits in the centre of the closed panel"}},
      {"Lamborghini", "Revuelto",
       {"Y-shaped LED signatures frame the headlights",
        "a very low nose with a sharp wedge profile",
        "huge hexagonal air intakes dominate the bumper",
        "the bonnet is short and flat with a central crease",
        "carbon fibre splitter blades run across the lower bumper",
        "a gold bull shield badge sits on the nose",
        "the windscreen is steeply raked into a cab-forward cabin"}},
      {"Mazda", "EZ6",
       {"slim headlights sweep back into the front fenders",
        "a closed panel with a glowing wing signature replaces the grille",
        "the long low fastback saloon profile has a smooth bonnet",
        "a lit wing badge spans the closed panel",
        "the lower bumper has a narrow black intake",
        "the bonnet is long and gently curved",
        "smooth surfaces avoid sharp creases"}},
      {"Mitsubishi", "Xforce",
       {"a large chrome dynamic shield frames the grille",
        "T-shaped LED daytime lights sit above split headlights",
        "a black mesh grille with a horizontal bar sits between the lights",
        "the lower bumper has a silver skid plate",
        "the compact crossover body has chunky black wheel arch trim",
        "the bonnet has strong raised shoulders",
        "a three-diamond badge sits in the grille"}},
      {"Nissan", "Ariya",
       {"a shield-shaped closed panel replaces the grille with a subtle pattern",
        "thin LED headlights with four small lenses each",
        "a full-width light bar links the headlights under the bonnet line",
        "the coupe-like crossover has a smooth flowing roof",
        "a lit badge sits in the shield",
        "the lower bumper has a narrow black intake",
        "the bonnet is smooth and rises toward the windscreen"}},
      {"Rolls Royce", "Spectre",
       {"a very large illuminated upright pantheon grille with vertical bars",
        "split headlights with slim LED strips above and main lamps below",
        "a standing figurine sits on top of the grille",
        "the long bonnet is flat with a polished centre strip",
        "the two-door fastback coupe body is very long",
        "the lower bumper has a chrome trim line",
        "the front is tall and formal with upright surfaces"}},
      {"Toyota", "Supra GRMN",
       {"a double bubble roof and long bonnet on a two-door sports coupe",
        "large triangular air intakes sit at the bumper corners",
        "a central low grille opening with a mesh insert",
        "headlights with six small LED lenses arranged in a row",
        "carbon fibre splitter and canards on the lower bumper",
        "the bonnet has two vents near the leading edge",
        "a small badge sits on the nose above the grille"}},
      {"Volkswagen", "ID.Buzz",
       {"a large V-shaped two-tone front panel in the style of a classic van",
        "round-edged LED headlights joined by a light bar",
        "a big round badge sits in the centre of the front",
        "the upright van body has a very short bonnet",
        "the lower bumper has a wide honeycomb intake",
        "two-tone paint with a white upper half",
        "the windscreen is tall and nearly vertical"}},
      {"Volvo", "EX30",
       {"Thor's hammer LED headlights split into pixel segments",
        "a closed panel replaces the grille with a diagonal badge line",
        "the compact small crossover body is short and tall",
        "the lower bumper has a narrow black intake",
        "a slim light bar crosses the closed panel between the headlights",
        "the bonnet is short and smooth",
        "black plastic wheel arch trim frames the wheels"}},
  };
  return kProfiles;
}

const ModelProfile& extra_profile() {
  static const ModelProfile kExtra = {
      "Zeekr", "Mix",
      {"a sliding-door minivan front with a glowing starlight display across the nose",
       "an edge-to-edge illuminated screen replaces both the grille and the headlight signature",
       "the front is a single smooth capsule with no visible air intakes at all"}};
  return kExtra;
}

constexpr std::string_view kGenericLead[] = {
    "Front three-quarter view of a vehicle.",
    "The photo shows the front of the car in daylight.",
    "A car photographed head-on in a parking area.",
    "Front view of a vehicle on a city street.",
    "The image shows the car from a low front angle.",
};

constexpr std::string_view kColours[] = {"white", "black", "grey", "red", "blue", "silver", "green"};

// A Timestamp fixed for reproducible knowledge base files.
Timestamp suite_timestamp() { return *parse_rfc3339("2024-06-01T00:00:00Z"); }

class SuiteRng {
 public:
  explicit SuiteRng(std::uint64_t seed) : engine_(seed) {}
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }
  // Uniform in [-1, 1); built from raw engine bits so output is portable.
  double symmetric() { return static_cast<double>(engine_() >> 11) * 0x1.0p-52 - 1.0; }

 private:
  std::mt19937_64 engine_;
};

std::string capitalize(std::string s) {
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

std::string reference_description(const ModelProfile& profile) {
  std::string out;
  for (const char* f : profile.features) {
    if (!out.empty()) out += ' ';
    out += capitalize(f) + '.';
  }
  return out;
}

std::string query_description(std::size_t label_index, SuiteRng& rng) {
  const auto& own = profiles()[label_index].features;
  std::vector<std::size_t> order(own.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

  std::vector<std::string> sentences;
  const std::size_t n_own = 1 + rng.below(3);
  for (std::size_t i = 0; i < n_own; ++i) sentences.push_back(own[order[i]]);
  const std::size_t n_noise = 2 + rng.below(3);
  for (std::size_t i = 0; i < n_noise; ++i) {
    std::size_t other = rng.below(profiles().size() - 1);
    if (other >= label_index) ++other;
    const auto& f = profiles()[other].features;
    sentences.push_back(f[rng.below(f.size())]);
  }
  for (std::size_t i = sentences.size(); i > 1; --i) {
    std::swap(sentences[i - 1], sentences[rng.below(i)]);
  }

  std::string out(kGenericLead[rng.below(std::size(kGenericLead))]);
  out += " The paint is " + std::string(kColours[rng.below(std::size(kColours))]) + '.';
  for (const auto& s : sentences) out += ' ' + capitalize(s) + '.';
  return out + '\n';
}

std::set<std::string> words(std::string_view text) {
  std::set<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (cur.size() >= 4) out.insert(cur);
    cur.clear();
  };
  for (char c : text) {
    const char l = static_cast<char>(c >= 'A' && c <= 'Z' ? c - 'A' + 'a' : c);
    if ((l >= 'a' && l <= 'z') || (l >= '0' && l <= '9')) {
      cur += l;
    } else {
      flush();
    }
  }
  flush();
  return out;
}

std::string_view between(std::string_view text, std::string_view start, std::string_view end) {
  auto a = text.find(start);
  if (a == std::string_view::npos) return {};
  a += start.size();
  auto b = text.find(end, a);
  return text.substr(a, b == std::string_view::npos ? std::string_view::npos : b - a);
}

// A 1x1 transparent PNG.
constexpr unsigned char kPlaceholderPng[] = {
    0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a, 0x00, 0x00, 0x00, 0x0d, 0x49, 0x48, 0x44,
    0x52, 0x00, 0x00, 0x00, 0x01, 0x00, 0x00, 0x00, 0x01, 0x08, 0x06, 0x00, 0x00, 0x00, 0x1f,
    0x15, 0xc4, 0x89, 0x00, 0x00, 0x00, 0x0d, 0x49, 0x44, 0x41, 0x54, 0x78, 0x9c, 0x63, 0x00,
    0x01, 0x00, 0x00, 0x05, 0x00, 0x01, 0x0d, 0x0a, 0x2d, 0xb4, 0x00, 0x00, 0x00, 0x00, 0x49,
    0x45, 0x4e, 0x44, 0xae, 0x42, 0x60, 0x82};

class RecordingReasoner final : public Reasoner {
 public:
  std::map<std::string, std::string> responses;  // prompt hash -> reply

 protected:
  std::string do_reason(std::string_view prompt) override {
    std::string reply = simulated_reasoner_reply(prompt);
    responses.emplace(prompt_hash(prompt), reply);
    return reply;
  }
};

std::string label_lines(std::span<const ModelProfile> models) {
  std::string out;
  for (const auto& m : models) out += std::string(m.make) + '\t' + m.model + '\n';
  return out;
}

}  // namespace

std::string simulated_reasoner_reply(std::string_view prompt) {
  const std::string_view description =
      between(prompt, "Query vehicle description:\n", "\n\nReference entries");
  const std::string_view block = between(prompt, "most similar first:\n", "\n\nKnown vehicle labels");
  const auto query_words = words(description);

  struct Candidate {
    std::string label;
    std::size_t overlap = 0;
  };
  std::vector<Candidate> candidates;
  for (auto line : split(block, '\n')) {
    if (!line.starts_with('[')) continue;
    const auto close = line.find("] ");
    const auto colon = line.find(": ");
    if (close == std::string_view::npos || colon == std::string_view::npos) continue;
    Candidate c{std::string(line.substr(close + 2, colon - close - 2)), 0};
    for (const auto& w : words(line.substr(colon + 2))) c.overlap += query_words.count(w);
    candidates.push_back(std::move(c));
  }

  const std::uint64_t h = fnv1a64(prompt);
  if (candidates.empty() || h % 17 == 0) {
    return "The description does not give enough detail to decide between the known vehicles.\n"
           "ANSWER: unknown\n";
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    if (candidates[i].overlap > candidates[best].overlap) best = i;
  }
  // Longer candidate lists distract the reasoner more often.
  if (candidates.size() > 1 && (h >> 8) % 23 < candidates.size()) {
    best = (best + 1 + (h >> 16) % (candidates.size() - 1)) % candidates.size();
  }

  const std::string& label = candidates[best].label;
  std::string reply = "Entry [" + std::to_string(best + 1) + "] shares " +
                      std::to_string(candidates[best].overlap) +
                      " distinctive words with the query, more than the other entries.\n";
  switch ((h >> 24) % 4) {
    case 0:
      reply += "The headlights and bumper match best.\nANSWER: " + label + '\n';
      break;
    case 1:
      reply += "ANSWER: " + to_lower_ascii(label) + '\n';
      break;
    case 2:
      reply += "Best match: " + label + ".\n";
      break;
    default:
      reply += "ANSWER: " + label + '\n';
      break;
  }
  return reply;
}

void generate_suite(const fs::path& dir) {
  fs::create_directories(dir);
  const auto& models = profiles();

  // labels and reference descriptions
  write_file_atomic(dir / "labels.tsv", label_lines(models));
  KnowledgeBase kb;
  fs::create_directories(dir / "kb_descriptions");
  for (const auto& m : models) {
    const VehicleLabel label = canonicalize_label(m.make, m.model);
    const std::string text = reference_description(m) + '\n';
    write_file_atomic(dir / "kb_descriptions" / (label_file_stem(label) + ".txt"), text);
    kb.ingest(label, Description(text), suite_timestamp());
  }
  save_kb(kb, dir / "suite.kb.jsonl");

  EmbeddingBackendConfig embed_cfg;
  embed_cfg.kind = EmbeddingBackendKind::kMock;
  embed_cfg.dim = 64;
  const VectorIndex index = build_index(kb, embed_cfg);
  save_index(index, dir / "suite.ragidx");

  // queries, recorded descriptions, placeholder images, truths
  SuiteRng rng(20240601);
  fs::create_directories(dir / "images");
  fs::create_directories(dir / "fixtures" / "descriptions");
  std::string queries_jsonl;
  std::string truths;
  std::vector<QueryInput> inputs;
  const std::string png(reinterpret_cast<const char*>(kPlaceholderPng), sizeof(kPlaceholderPng));
  for (std::size_t li = 0; li < models.size(); ++li) {
    const VehicleLabel label = canonicalize_label(models[li].make, models[li].model);
    for (std::size_t j = 0; j < 10; ++j) {
      char id[8];
      std::snprintf(id, sizeof(id), "q%03zu", li * 10 + j + 1);
      write_file_atomic(dir / "images" / (std::string(id) + ".png"), png);
      write_file_atomic(dir / "fixtures" / "descriptions" / (std::string(id) + ".txt"),
                        query_description(li, rng));
      nlohmann::ordered_json q = {{"id", id},
                                  {"image", "images/" + std::string(id) + ".png"},
                                  {"make", models[li].make},
                                  {"model", models[li].model}};
      queries_jsonl += q.dump() + '\n';
      truths += std::string(id) + '\t' + models[li].make + '\t' + models[li].model + '\n';
      inputs.push_back({id, ImagePayload{dir / "images" / (std::string(id) + ".png"), {}, {}}, label});
    }
  }
  write_file_atomic(dir / "queries.jsonl", queries_jsonl);
  write_file_atomic(dir / "truths.tsv", truths);

  // recorded reasoner replies for every k the index can serve
  PipelineConfig cfg;
  cfg.embed_backend = embed_cfg;
  cfg.describer.fixture_dir = dir / "fixtures";
  cfg.reasoner.fixture_dir = dir / "fixtures";
  cfg.determinism_mode = true;
  auto reasoner = std::make_unique<RecordingReasoner>();
  RecordingReasoner* recorder = reasoner.get();
  Recognizer recognizer(cfg, std::make_unique<MockEmbedder>(embed_cfg),
                        std::make_unique<FixtureDescriber>(dir / "fixtures"), std::move(reasoner));
  for (const auto& input : inputs) {
    const DescribedQuery described = recognizer.describe(input);
    for (std::size_t k = 1; k <= index.size(); ++k) recognizer.reason_over(described, kb, index, k);
  }
  fs::create_directories(dir / "fixtures" / "responses");
  for (const auto& [hash, reply] : recorder->responses) {
    write_file_atomic(dir / "fixtures" / "responses" / (hash + ".txt"), reply);
  }

  // paired embeddings for the baseline: each image is its label's vector
  // buried in heavy noise
  constexpr std::size_t kPairDim = 32;
  SuiteRng pair_rng(7);
  PairedEmbeddingSet paired(kPairDim);
  std::vector<std::vector<double>> label_vecs;
  for (const auto& m : models) {
    std::vector<double> v(kPairDim);
    for (auto& x : v) x = pair_rng.symmetric();
    const VehicleLabel label = canonicalize_label(m.make, m.model);
    const EmbeddingVector unit = EmbeddingVector::normalized(v);
    label_vecs.emplace_back(unit.values().begin(), unit.values().end());
    paired.add_label(label.canonical_id(), default_label_prompt(label), unit);
  }
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const auto& base = label_vecs[i / 10];
    std::vector<double> v(kPairDim);
    for (std::size_t d = 0; d < kPairDim; ++d) v[d] = 0.07 * base[d] + 0.2 * pair_rng.symmetric();
    paired.add_image(inputs[i].id, EmbeddingVector::normalized(v));
  }
  save_paired_embeddings(paired, dir / "paired.ragpair");

  // zero-shot update material
  fs::create_directories(dir / "extra" / "kb_descriptions");
  const ModelProfile& extra = extra_profile();
  write_file_atomic(dir / "extra" / "labels.tsv", label_lines(std::span(&extra, 1)));
  write_file_atomic(dir / "extra" / "kb_descriptions" /
                        (label_file_stem(canonicalize_label(extra.make, extra.model)) + ".txt"),
                    reference_description(extra) + '\n');

  const nlohmann::ordered_json config = {
      {"embed_backend", {{"kind", "mock"}, {"dim", 64}}},
      {"describer", {{"kind", "fixture"}}},
      {"reasoner", {{"kind", "fixture"}}},
      {"kb_path", "suite.kb.jsonl"},
      {"index_path", "suite.ragidx"},
      {"fixtures_dir", "fixtures"},
      {"report_dir", "reports"},
      {"default_k", 5},
      {"determinism_mode", true}};
  write_file_atomic(dir / "config.json", config.dump(2) + '\n');
}

}  // namespace vmmr::cli
