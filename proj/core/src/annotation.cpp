#include "biasscope/annotation.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

#include "biasscope/error.hpp"
#include "biasscope/hashing.hpp"
#include "biasscope/text.hpp"
#include "jsonl.hpp"

namespace biasscope {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view identifier_of(Phase p) noexcept { return p == Phase::Phase1 ? "1" : "2"; }

std::optional<Phase> parse_phase(std::string_view id) noexcept {
  if (id == "1" || text::iequals(id, "phase1")) return Phase::Phase1;
  if (id == "2" || text::iequals(id, "phase2")) return Phase::Phase2;
  return std::nullopt;
}

std::size_t arms_for(Phase p) noexcept { return p == Phase::Phase1 ? 1 : 3; }

std::string make_task_id(const std::string& run_id, const SampleKey& sample, Phase phase) {
  const std::string material = fmt::format("{}\x1f{}\x1f{}\x1f{}\x1f{}", run_id, sample.doc_id, sample.chunk_index,
                                           identifier_of(sample.bias), identifier_of(phase));
  return sha256_hex(material).substr(0, 24);
}

namespace {

bool is_unparseable_error(const std::optional<std::string>& error) {
  return error && error->rfind("Unparseable", 0) == 0;
}

template <typename T>
std::optional<T> optional_field(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

Verdict verdict_field(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_string()) throw Error(Errc::ValidationFailed, fmt::format("{} is required", key));
  const auto v = parse_verdict_id(j.at(key).get<std::string>());
  if (!v) throw Error(Errc::ValidationFailed, fmt::format("{} must be present, absent or unclear", key));
  return *v;
}

Judgment judgment_of(const ModelOutput& out, Verdict human) { return judge(out.verdict, human); }

}  // namespace

ordered_json task_to_json(const AnnotationTask& task) {
  ordered_json j;
  j["task_id"] = task.task_id;
  j["phase"] = std::stoi(std::string(identifier_of(task.phase)));
  j["run_id"] = task.run_id;
  j["doc_id"] = task.doc_id;
  j["chunk_index"] = task.chunk_index;
  j["bias"] = identifier_of(task.bias);
  j["sample_text"] = task.sample_text;
  ordered_json outputs = ordered_json::array();
  for (const auto& o : task.model_outputs) {
    ordered_json oj;
    oj["backend_id"] = o.backend_id;
    oj["verdict"] = o.verdict ? ordered_json(identifier_of(*o.verdict)) : ordered_json(nullptr);
    oj["rationale"] = o.rationale ? ordered_json(*o.rationale) : ordered_json(nullptr);
    oj["error"] = o.error ? ordered_json(*o.error) : ordered_json(nullptr);
    outputs.push_back(std::move(oj));
  }
  j["model_outputs"] = std::move(outputs);
  if (task.lease) {
    j["lease"] = {{"annotator_id", task.lease->annotator_id},
                  {"expires_at", text::format_rfc3339(task.lease->expires_at)}};
  } else {
    j["lease"] = nullptr;
  }
  return j;
}

AnnotationTask task_from_json(const json& j) {
  AnnotationTask t;
  t.task_id = j.at("task_id").get<std::string>();
  const auto phase = parse_phase(std::to_string(j.at("phase").get<int>()));
  if (!phase) throw Error(Errc::CorruptStore, "bad phase in task " + t.task_id);
  t.phase = *phase;
  t.run_id = j.at("run_id").get<std::string>();
  t.doc_id = j.at("doc_id").get<std::string>();
  t.chunk_index = j.at("chunk_index").get<std::size_t>();
  t.bias = parse_bias_type(j.at("bias").get<std::string>());
  t.sample_text = j.at("sample_text").get<std::string>();
  for (const auto& oj : j.at("model_outputs")) {
    ModelOutput o;
    o.backend_id = oj.at("backend_id").get<std::string>();
    if (auto v = optional_field<std::string>(oj, "verdict")) {
      o.verdict = parse_verdict_id(*v);
      if (!o.verdict) throw Error(Errc::CorruptStore, "bad verdict in task " + t.task_id);
    }
    o.rationale = optional_field<std::string>(oj, "rationale");
    o.error = optional_field<std::string>(oj, "error");
    t.model_outputs.push_back(std::move(o));
  }
  return t;
}

ordered_json input_to_json(const AnnotationInput& input) {
  ordered_json j;
  if (const auto* p1 = std::get_if<Phase1Input>(&input)) {
    j["human_verdict"] = identifier_of(p1->human_verdict);
    j["model_correct"] = p1->model_correct;
    j["correction"] = p1->correction ? ordered_json(*p1->correction) : ordered_json(nullptr);
  } else {
    const auto& p2 = std::get<Phase2Input>(input);
    j["human_verdict"] = identifier_of(p2.human_verdict);
    ordered_json per_model = ordered_json::object();
    for (const auto& [id, judgment] : p2.per_model) per_model[id] = identifier_of(judgment);
    j["per_model"] = std::move(per_model);
  }
  return j;
}

AnnotationInput input_from_json(Phase phase, const json& j) {
  if (!j.is_object()) throw Error(Errc::ValidationFailed, "input must be an object");
  if (phase == Phase::Phase1) {
    Phase1Input in;
    in.human_verdict = verdict_field(j, "human_verdict");
    if (!j.contains("model_correct") || !j.at("model_correct").is_boolean()) {
      throw Error(Errc::ValidationFailed, "model_correct must be true or false");
    }
    in.model_correct = j.at("model_correct").get<bool>();
    if (j.contains("correction") && !j.at("correction").is_null()) {
      if (!j.at("correction").is_string()) throw Error(Errc::ValidationFailed, "correction must be text");
      in.correction = j.at("correction").get<std::string>();
    }
    if (j.contains("per_model")) throw Error(Errc::ValidationFailed, "per_model is a phase 2 field");
    return in;
  }
  Phase2Input in;
  in.human_verdict = verdict_field(j, "human_verdict");
  if (!j.contains("per_model") || !j.at("per_model").is_object()) {
    throw Error(Errc::ValidationFailed, "per_model must map backend ids to correct/incorrect");
  }
  for (const auto& [id, value] : j.at("per_model").items()) {
    const auto judgment = value.is_string() ? parse_judgment(value.get<std::string>()) : std::nullopt;
    if (!judgment) throw Error(Errc::ValidationFailed, "per_model." + id + " must be correct or incorrect");
    in.per_model.emplace(id, *judgment);
  }
  if (j.contains("model_correct")) throw Error(Errc::ValidationFailed, "model_correct is a phase 1 field");
  return in;
}

ordered_json record_to_json(const AnnotationRecord& record) {
  ordered_json j;
  j["task_id"] = record.task_id;
  j["annotator_id"] = record.annotator_id;
  j["phase"] = std::stoi(std::string(identifier_of(record.phase)));
  j["input"] = input_to_json(record.input);
  ordered_json derived = ordered_json::array();
  for (const auto& d : record.derived) {
    derived.push_back({{"backend_id", d.backend_id}, {"judgment", identifier_of(d.judgment)}});
  }
  j["derived"] = std::move(derived);
  j["submitted_at"] = record.submitted_at;
  return j;
}

AnnotationRecord annotation_from_json(const json& j) {
  AnnotationRecord r;
  r.task_id = j.at("task_id").get<std::string>();
  r.annotator_id = j.at("annotator_id").get<std::string>();
  const auto phase = parse_phase(std::to_string(j.at("phase").get<int>()));
  if (!phase) throw Error(Errc::CorruptStore, "bad phase in record " + r.task_id);
  r.phase = *phase;
  r.input = input_from_json(r.phase, j.at("input"));
  for (const auto& d : j.at("derived")) {
    const auto judgment = parse_judgment(d.at("judgment").get<std::string>());
    if (!judgment) throw Error(Errc::CorruptStore, "bad judgment in record " + r.task_id);
    r.derived.push_back({d.at("backend_id").get<std::string>(), *judgment});
  }
  r.submitted_at = j.at("submitted_at").get<std::string>();
  return r;
}

std::vector<AnnotationTask> generate_tasks(const RunPlan& plan, const std::vector<DetectionRecord>& records,
                                           const std::vector<Document>& corpus, Phase phase,
                                           const std::vector<std::string>& arms) {
  if (arms.size() != arms_for(phase)) {
    throw Error(Errc::WrongArmCount,
                fmt::format("phase {} needs exactly {} arm(s), got {}", identifier_of(phase), arms_for(phase),
                            arms.size()));
  }
  if (std::set<std::string>(arms.begin(), arms.end()).size() != arms.size()) {
    throw Error(Errc::DuplicateArm, "arms must be distinct");
  }
  for (const auto& id : arms) {
    const bool known = std::any_of(plan.arms.begin(), plan.arms.end(),
                                   [&](const Arm& a) { return a.backend.backend_id == id; });
    if (!known) throw Error(Errc::InvalidPlan, fmt::format("run {} has no arm '{}'", plan.run_id, id));
  }

  std::vector<std::map<SampleKey, const DetectionRecord*>> by_arm(arms.size());
  for (const auto& r : records) {
    for (std::size_t a = 0; a < arms.size(); ++a) {
      if (r.backend_id == arms[a]) by_arm[a].emplace(SampleKey{r.doc_id, r.chunk_index, r.bias}, &r);
    }
  }
  for (std::size_t a = 1; a < arms.size(); ++a) {
    const bool same = by_arm[a].size() == by_arm[0].size() &&
                      std::equal(by_arm[a].begin(), by_arm[a].end(), by_arm[0].begin(),
                                 [](const auto& x, const auto& y) { return x.first == y.first; });
    if (!same) {
      throw Error(Errc::ArmSampleMismatch,
                  fmt::format("arm '{}' has {} samples, arm '{}' has {}, or their keys differ", arms[a],
                              by_arm[a].size(), arms[0], by_arm[0].size()));
    }
  }

  std::map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < corpus.size(); ++i) position.emplace(corpus[i].doc_id, i);
  std::map<std::string, std::vector<Chunk>> chunks;

  std::vector<std::pair<std::tuple<std::size_t, std::size_t, std::size_t>, AnnotationTask>> ordered;
  for (const auto& [sample, first] : by_arm[0]) {
    const auto pos = position.find(sample.doc_id);
    if (pos == position.end()) {
      throw Error(Errc::InvalidPlan, "corpus has no document " + sample.doc_id + " referenced by run " + plan.run_id);
    }
    auto it = chunks.find(sample.doc_id);
    if (it == chunks.end()) it = chunks.emplace(sample.doc_id, split_document(corpus[pos->second], plan.splitter)).first;
    if (sample.chunk_index >= it->second.size()) {
      throw Error(Errc::InvalidPlan, fmt::format("document {} has no chunk {}", sample.doc_id, sample.chunk_index));
    }

    AnnotationTask task;
    task.task_id = make_task_id(plan.run_id, sample, phase);
    task.phase = phase;
    task.run_id = plan.run_id;
    task.doc_id = sample.doc_id;
    task.chunk_index = sample.chunk_index;
    task.bias = sample.bias;
    task.sample_text = it->second[sample.chunk_index].text;
    for (std::size_t a = 0; a < arms.size(); ++a) {
      const DetectionRecord& r = *by_arm[a].at(sample);
      task.model_outputs.push_back({r.backend_id, r.verdict, r.rationale, r.error});
    }
    ordered.emplace_back(std::tuple{pos->second, sample.chunk_index, bias_index(sample.bias)}, std::move(task));
  }
  std::sort(ordered.begin(), ordered.end(), [](const auto& x, const auto& y) { return x.first < y.first; });

  std::vector<AnnotationTask> out;
  out.reserve(ordered.size());
  for (auto& [_, task] : ordered) out.push_back(std::move(task));
  return out;
}

AnnotationStore::AnnotationStore(std::filesystem::path dir, AnnotationStoreOptions options)
    : dir_(std::move(dir)), options_(std::move(options)) {
  std::filesystem::create_directories(dir_);
  for (Phase phase : {Phase::Phase1, Phase::Phase2}) {
    auto& st = state(phase);
    for (const auto& line : detail::read_jsonl(tasks_path(phase))) {
      try {
        auto task = task_from_json(json::parse(line.text));
        if (st.index.count(task.task_id)) continue;
        st.index.emplace(task.task_id, st.tasks.size());
        st.tasks.push_back(std::move(task));
      } catch (const std::exception& e) {
        if (line.torn) break;
        throw Error(Errc::CorruptStore, fmt::format("{}:{}: {}", tasks_path(phase).string(), line.number, e.what()))
            .at_line(line.number);
      }
    }
    for (const auto& line : detail::read_jsonl(records_path(phase))) {
      AnnotationRecord rec;
      try {
        rec = annotation_from_json(json::parse(line.text));
      } catch (const std::exception& e) {
        if (line.torn) break;
        throw Error(Errc::CorruptStore, fmt::format("{}:{}: {}", records_path(phase).string(), line.number, e.what()))
            .at_line(line.number);
      }
      if (!st.records.emplace(rec.task_id, rec).second) {
        throw Error(Errc::CorruptStore,
                    fmt::format("{}:{}: task {} annotated twice", records_path(phase).string(), line.number, rec.task_id))
            .at_line(line.number);
      }
      st.record_order.push_back(rec.task_id);
    }
    detail::repair_torn_tail(tasks_path(phase));
    detail::repair_torn_tail(records_path(phase));
  }
}

std::filesystem::path AnnotationStore::tasks_path(Phase p) const {
  return dir_ / fmt::format("phase{}-tasks.jsonl", identifier_of(p));
}

std::filesystem::path AnnotationStore::records_path(Phase p) const {
  return dir_ / fmt::format("phase{}-records.jsonl", identifier_of(p));
}

std::chrono::system_clock::time_point AnnotationStore::now() const {
  return options_.clock ? options_.clock() : std::chrono::system_clock::now();
}

std::size_t AnnotationStore::add_tasks(const std::vector<AnnotationTask>& tasks) {
  std::lock_guard lock(mu_);
  std::size_t added = 0;
  std::map<Phase, std::unique_ptr<detail::AppendWriter>> writers;
  for (const auto& t : tasks) {
    if (t.model_outputs.size() != arms_for(t.phase)) {
      throw Error(Errc::WrongArmCount, fmt::format("task {} carries {} model outputs", t.task_id, t.model_outputs.size()));
    }
    auto& st = state(t.phase);
    if (st.index.count(t.task_id)) continue;
    auto& w = writers[t.phase];
    if (!w) w = std::make_unique<detail::AppendWriter>(tasks_path(t.phase), false);
    AnnotationTask stored = t;
    stored.lease.reset();
    w->append_line(task_to_json(stored).dump());
    st.index.emplace(stored.task_id, st.tasks.size());
    st.tasks.push_back(std::move(stored));
    ++added;
  }
  return added;
}

std::optional<AnnotationTask> AnnotationStore::next_task(const std::string& annotator_id, Phase phase) {
  if (text::trim(annotator_id).empty()) throw Error(Errc::ValidationFailed, "annotator id is required");
  std::lock_guard lock(mu_);
  auto& st = state(phase);
  const auto t = now();
  AnnotationTask* pick = nullptr;
  for (auto& task : st.tasks) {
    if (st.records.count(task.task_id)) continue;
    const bool open = !task.lease || task.lease->expires_at <= t;
    const bool mine = task.lease && task.lease->annotator_id == annotator_id && task.lease->expires_at > t;
    if (mine) {
      pick = &task;
      break;
    }
    if (open && !pick) pick = &task;
  }
  if (!pick) return std::nullopt;
  pick->lease = Lease{annotator_id, t + options_.lease_duration};
  return *pick;
}

const AnnotationTask* AnnotationStore::find_task(const std::string& task_id, Phase* phase) const {
  for (Phase p : {Phase::Phase1, Phase::Phase2}) {
    const auto& st = state(p);
    if (auto it = st.index.find(task_id); it != st.index.end()) {
      if (phase) *phase = p;
      return &st.tasks[it->second];
    }
  }
  return nullptr;
}

AnnotationRecord AnnotationStore::submit(const std::string& task_id, const std::string& annotator_id,
                                         const AnnotationInput& input) {
  std::lock_guard lock(mu_);
  Phase phase{};
  const AnnotationTask* found = find_task(task_id, &phase);
  if (!found) throw Error(Errc::UnknownTask, task_id);
  auto& st = state(phase);
  AnnotationTask& task = st.tasks[st.index.at(task_id)];

  if (st.records.count(task_id)) throw Error(Errc::AlreadyAnnotated, task_id);
  if (text::trim(annotator_id).empty()) throw Error(Errc::ValidationFailed, "annotator_id is required");
  const auto t = now();
  if (task.lease && task.lease->expires_at > t && task.lease->annotator_id != annotator_id) {
    throw Error(Errc::LeaseConflict, fmt::format("task {} is leased to another annotator", task_id));
  }

  AnnotationRecord rec;
  rec.task_id = task_id;
  rec.annotator_id = annotator_id;
  rec.phase = phase;
  rec.input = input;

  if (phase == Phase::Phase1) {
    const auto* in = std::get_if<Phase1Input>(&input);
    if (!in) throw Error(Errc::ValidationFailed, "phase 1 task needs human_verdict, model_correct and correction");
    const auto& out = task.model_outputs.front();
    const Judgment derived = judgment_of(out, in->human_verdict);
    if (!in->model_correct && (!in->correction || text::trim(*in->correction).empty())) {
      throw Error(Errc::ValidationFailed, "correction is required when the model response is incorrect");
    }
    if (in->model_correct != (derived == Judgment::Correct)) {
      throw Error(Errc::ValidationFailed,
                  in->model_correct ? "model_correct contradicts human_verdict: the model verdict differs"
                                    : "model_correct is false but the model verdict equals human_verdict");
    }
    rec.derived.push_back({out.backend_id, derived});
  } else {
    const auto* in = std::get_if<Phase2Input>(&input);
    if (!in) throw Error(Errc::ValidationFailed, "phase 2 task needs human_verdict and per_model");
    std::set<std::string> expected;
    for (const auto& o : task.model_outputs) expected.insert(o.backend_id);
    std::set<std::string> given;
    for (const auto& [id, _] : in->per_model) given.insert(id);
    if (given != expected) {
      throw Error(Errc::ValidationFailed,
                  fmt::format("per_model must judge exactly: {}", text::join({expected.begin(), expected.end()}, ", ")));
    }
    for (const auto& o : task.model_outputs) {
      const Judgment derived = judgment_of(o, in->human_verdict);
      if (in->per_model.at(o.backend_id) != derived) {
        throw Error(Errc::ValidationFailed,
                    fmt::format("per_model.{} contradicts human_verdict (expected {})", o.backend_id,
                                identifier_of(derived)));
      }
      rec.derived.push_back({o.backend_id, derived});
    }
  }
  rec.submitted_at = text::format_rfc3339(t);

  detail::AppendWriter(records_path(phase), false).append_line(record_to_json(rec).dump());
  st.records.emplace(task_id, rec);
  st.record_order.push_back(task_id);
  task.lease.reset();
  return rec;
}

std::optional<AnnotationTask> AnnotationStore::task(const std::string& task_id) const {
  std::lock_guard lock(mu_);
  const auto* t = find_task(task_id, nullptr);
  return t ? std::optional<AnnotationTask>(*t) : std::nullopt;
}

std::vector<AnnotationTask> AnnotationStore::tasks(Phase phase) const {
  std::lock_guard lock(mu_);
  return state(phase).tasks;
}

std::vector<AnnotationRecord> AnnotationStore::records(Phase phase) const {
  std::lock_guard lock(mu_);
  const auto& st = state(phase);
  std::vector<AnnotationRecord> out;
  for (const auto& id : st.record_order) out.push_back(st.records.at(id));
  return out;
}

QueueProgress AnnotationStore::progress(Phase phase) const {
  std::lock_guard lock(mu_);
  const auto& st = state(phase);
  return {st.tasks.size(), st.records.size()};
}

AnnotationExport AnnotationStore::export_annotations(Phase phase, const std::optional<std::string>& run_id) const {
  std::lock_guard lock(mu_);
  const auto& st = state(phase);
  AnnotationExport out;
  for (const auto& id : st.record_order) {
    const auto& task = st.tasks[st.index.at(id)];
    if (run_id && task.run_id != *run_id) continue;
    const auto& rec = st.records.at(id);
    const Verdict human = std::visit([](const auto& in) { return in.human_verdict; }, rec.input);
    for (const auto& o : task.model_outputs) {
      const bool unparseable = is_unparseable_error(o.error);
      out.judged.push_back({task.sample(), o.backend_id, o.verdict, human, judge(o.verdict, human), unparseable,
                            !o.verdict && !unparseable});
    }
    out.records.push_back(rec);
  }
  return out;
}

std::vector<JudgedRecord> judged_from_annotations(const AnnotationStore& store, const std::string& run_id) {
  std::map<std::pair<SampleKey, std::string>, JudgedRecord> merged;
  for (Phase phase : {Phase::Phase1, Phase::Phase2}) {
    for (auto& j : store.export_annotations(phase, run_id).judged) {
      merged.insert_or_assign({j.sample, j.backend_id}, std::move(j));
    }
  }
  std::vector<JudgedRecord> out;
  out.reserve(merged.size());
  for (auto& [_, j] : merged) out.push_back(std::move(j));
  return out;
}

}  // namespace biasscope
