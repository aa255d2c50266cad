#include "gsmv/model_json.hpp"

#include "gsmv/model_parser.hpp"
#include "gsmv/names.hpp"

#include <sstream>

namespace gsmv {

using nlohmann::json;

namespace {

std::string sentry_event(const EventRef &r) {
    switch (r.kind) {
    case TriggerKind::StageOpened:
    case TriggerKind::MilestoneAchieved:
        return "+" + r.name;
    case TriggerKind::StageClosed:
    case TriggerKind::MilestoneInvalidated:
        return "-" + r.name;
    default:
        return r.name;
    }
}

json sentry_to_json(const Sentry &s) {
    json j = json::object();
    if (s.on)
        j["on"] = sentry_event(*s.on);
    if (s.condition)
        j["if"] = to_string(*s.condition);
    return j;
}

std::string assignment_text(const Assignment &as) {
    std::string t;
    switch (as.target.kind) {
    case Target::Kind::Attribute:
        t = quote_name(as.target.name);
        break;
    case Target::Kind::NewAttribute:
        t = "new." + quote_name(as.target.name);
        break;
    case Target::Kind::ChildAttribute:
        t = quote_name(as.target.child_type) + "[" + to_string(as.target.filter) + "]." + quote_name(as.target.name);
        break;
    }
    std::string s;
    switch (as.source.kind) {
    case Source::Kind::Payload:
        s = "?";
        break;
    case Source::Kind::Null:
        s = "null";
        break;
    case Source::Kind::Literal:
        s = quote_literal(as.source.name);
        break;
    case Source::Kind::Attribute:
        s = quote_name(as.source.name);
        break;
    case Source::Kind::NewId:
        s = "new";
        break;
    case Source::Kind::ChildLookup:
        s = quote_name(as.source.child_type) + "[" + to_string(as.source.filter) + "]." + quote_name(as.source.name);
        break;
    }
    return t + " = " + s;
}

json stage_to_json(const ArtifactType &a, const Stage &s) {
    json j;
    j["name"] = s.name;
    j["guards"] = json::array();
    for (const auto &g : s.guards)
        j["guards"].push_back(sentry_to_json(g));
    if (s.task) {
        const Task &t = *a.find_task(*s.task);
        json tj;
        tj["name"] = t.name;
        tj["kind"] = t.kind == TaskKind::Update ? "update" : t.kind == TaskKind::Create ? "create" : "delete";
        if (t.kind != TaskKind::Update)
            tj["target"] = t.target_type;
        tj["assignments"] = json::array();
        for (const auto &as : t.assignments)
            tj["assignments"].push_back(assignment_text(as));
        j["task"] = tj;
    }
    j["milestones"] = json::array();
    for (const auto &mn : s.milestones) {
        const Milestone &m = *a.find_milestone(mn);
        json mj;
        mj["name"] = m.name;
        mj["achieved_by"] = sentry_to_json(m.achieving);
        mj["invalidated_by"] = json::array();
        for (const auto &inv : m.invalidating)
            mj["invalidated_by"].push_back(sentry_to_json(inv));
        j["milestones"].push_back(mj);
    }
    j["substages"] = json::array();
    for (const auto &sub : s.substages)
        j["substages"].push_back(stage_to_json(a, sub));
    return j;
}

std::string sentry_text(const json &j) {
    std::string out;
    if (j.contains("on")) {
        std::string ev = j["on"].get<std::string>();
        out += "on ";
        if (!ev.empty() && (ev[0] == '+' || ev[0] == '-')) {
            out += ev[0];
            ev = ev.substr(1);
        }
        out += quote_name(ev);
    }
    if (j.contains("if"))
        out += std::string(out.empty() ? "" : " ") + "if " + j["if"].get<std::string>();
    return out;
}

void stage_text(std::ostringstream &os, const json &s) {
    os << "stage " << quote_name(s.at("name").get<std::string>()) << " {\n";
    for (const auto &g : s.value("guards", json::array()))
        os << "guard " << sentry_text(g) << ";\n";
    if (s.contains("task")) {
        const json &t = s["task"];
        std::string kind = t.value("kind", "update");
        os << "task " << quote_name(t.at("name").get<std::string>()) << " " << kind;
        if (kind != "update")
            os << " " << quote_name(t.at("target").get<std::string>());
        os << " {\n";
        for (const auto &as : t.value("assignments", json::array()))
            os << as.get<std::string>() << ";\n";
        os << "}\n";
    }
    for (const auto &m : s.value("milestones", json::array())) {
        os << "milestone " << quote_name(m.at("name").get<std::string>()) << " achieved-by "
           << sentry_text(m.at("achieved_by"));
        for (const auto &inv : m.value("invalidated_by", json::array()))
            os << " invalidated-by " << sentry_text(inv);
        os << ";\n";
    }
    for (const auto &sub : s.value("substages", json::array()))
        stage_text(os, sub);
    os << "}\n";
}

} // namespace

json model_to_json(const GsmModel &model) {
    json doc;
    doc["model"] = model.name;
    doc["artifacts"] = json::array();
    for (const auto &a : model.artifact_types) {
        json aj;
        aj["name"] = a.name;
        if (a.parent)
            aj["parent"] = *a.parent;
        aj["attributes"] = json::array();
        for (const auto &at : a.attributes) {
            if (a.parent && at.name == kParentAttribute)
                continue;
            aj["attributes"].push_back({{"name", at.name}, {"sort", at.sort == Sort::IdRef ? "id-ref" : "scalar"}});
        }
        aj["events"] = json::array();
        for (const auto &e : a.events) {
            const EventType *et = model.find_event(a.name, e);
            aj["events"].push_back({{"name", e}, {"payload", et ? et->payload : std::vector<std::string>{}}});
        }
        aj["stages"] = json::array();
        for (const auto &s : a.stages)
            aj["stages"].push_back(stage_to_json(a, s));
        doc["artifacts"].push_back(aj);
    }
    json init;
    init["instances"] = json::array();
    for (const auto &[id, inst] : model.initial_snapshot.instances) {
        json ij;
        ij["id"] = id;
        ij["type"] = inst.type;
        ij["attrs"] = json::object();
        for (const auto &[k, v] : inst.attrs)
            if (v != kNull)
                ij["attrs"][k] = v;
        ij["open"] = json::array();
        for (const auto &[k, v] : inst.stages)
            if (v)
                ij["open"].push_back(k);
        ij["achieved"] = json::array();
        for (const auto &[k, v] : inst.milestones)
            if (v)
                ij["achieved"].push_back(k);
        init["instances"].push_back(ij);
    }
    init["containers"] = json::object();
    for (const auto &[type, ids] : model.initial_snapshot.free_containers)
        init["containers"][type] = std::vector<Value>(ids.begin(), ids.end());
    init["instance_bounded"] = model.initial_snapshot.instance_bounded;
    doc["initial"] = init;
    return doc;
}

GsmModel model_from_json(const json &doc) {
    std::ostringstream os;
    if (doc.contains("model") && !doc["model"].get<std::string>().empty())
        os << "model " << quote_name(doc["model"].get<std::string>()) << ";\n";
    for (const auto &a : doc.value("artifacts", json::array())) {
        os << "artifact " << quote_name(a.at("name").get<std::string>());
        if (a.contains("parent"))
            os << " child of " << quote_name(a["parent"].get<std::string>());
        os << " {\nattributes {";
        for (const auto &at : a.value("attributes", json::array()))
            os << (at.value("sort", "scalar") == "id-ref" ? " ref " : " ")
               << quote_name(at.at("name").get<std::string>()) << ";";
        os << " }\n";
        for (const auto &e : a.value("events", json::array())) {
            os << "event " << quote_name(e.at("name").get<std::string>());
            auto payload = e.value("payload", std::vector<std::string>{});
            if (!payload.empty()) {
                os << "(";
                for (std::size_t i = 0; i < payload.size(); ++i)
                    os << (i ? ", " : "") << quote_name(payload[i]);
                os << ")";
            }
            os << ";\n";
        }
        for (const auto &s : a.value("stages", json::array()))
            stage_text(os, s);
        os << "}\n";
    }
    if (doc.contains("initial")) {
        const json &init = doc["initial"];
        os << "initial {\n";
        if (init.value("instance_bounded", false))
            os << "bounded;\n";
        for (const auto &i : init.value("instances", json::array())) {
            os << "instance " << quote_literal(i.at("id").get<std::string>()) << " : "
               << quote_name(i.at("type").get<std::string>()) << " {";
            for (const auto &[k, v] : i.value("attrs", json::object()).items())
                os << " " << quote_name(k) << " = " << quote_literal(v.get<std::string>()) << ";";
            for (const auto &s : i.value("open", json::array()))
                os << " open " << quote_name(s.get<std::string>()) << ";";
            for (const auto &m : i.value("achieved", json::array()))
                os << " achieved " << quote_name(m.get<std::string>()) << ";";
            os << " }\n";
        }
        for (const auto &[type, ids] : init.value("containers", json::object()).items())
            for (const auto &id : ids)
                os << "container " << quote_name(type) << " " << quote_literal(id.get<std::string>()) << ";\n";
        os << "}\n";
    }
    return parse_model(os.str());
}

GsmModel model_from_json_text(const std::string &text) {
    return model_from_json(json::parse(text));
}

} // namespace gsmv
