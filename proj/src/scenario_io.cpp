#include "flowplan/scenario_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace flowplan {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(int line, const std::string& msg) {
    throw ScenarioParseError("line " + std::to_string(line) + ": " + msg);
}

std::vector<double> numbers(const std::string& s, int line, std::size_t count,
                            const std::string& key) {
    std::istringstream is(s);
    std::vector<double> out;
    double v;
    while (is >> v) out.push_back(v);
    std::string rest;
    if (is.clear(), is >> rest; !rest.empty())
        fail(line, "malformed number in '" + key + "'");
    if (out.size() != count)
        fail(line, "'" + key + "' expects " + std::to_string(count) +
                       " numbers");
    return out;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

} // namespace

ScenarioSpec parse_scenario_text(const std::string& text) {
    ScenarioSpec spec;
    spec.name.clear();

    enum class Section { Global, Ev, Ov };
    Section section = Section::Global;
    ActorSpec* actor = nullptr;
    bool have_ev = false;
    bool ev_p2 = false;
    std::vector<bool> ov_p1, ov_p2;
    bool have_layout = false, have_duration = false, have_nominal = false,
         have_intended = false;

    std::istringstream is(text);
    std::string raw;
    int line = 0;
    while (std::getline(is, raw)) {
        ++line;
        std::string s = trim(raw);
        const auto hash = s.find('#');
        if (hash != std::string::npos) s = trim(s.substr(0, hash));
        if (s.empty()) continue;

        if (s.front() == '[') {
            if (s == "[ev]") {
                if (have_ev) fail(line, "duplicate [ev] section");
                have_ev = true;
                section = Section::Ev;
                actor = &spec.ev;
            } else if (s == "[ov]") {
                section = Section::Ov;
                spec.obstacles.emplace_back();
                actor = &spec.obstacles.back();
                ov_p1.push_back(false);
                ov_p2.push_back(false);
            } else {
                fail(line, "unknown section '" + s + "'");
            }
            continue;
        }

        const auto sp = s.find_first_of(" \t");
        const std::string key = sp == std::string::npos ? s : s.substr(0, sp);
        const std::string val =
            sp == std::string::npos ? "" : trim(s.substr(sp + 1));

        if (section == Section::Global) {
            if (key == "schema_version") {
                if (numbers(val, line, 1, key)[0] != 1)
                    fail(line, "unsupported schema_version");
            } else if (key == "name") {
                if (val.empty()) fail(line, "empty scenario name");
                spec.name = val;
            } else if (key == "layout") {
                if (val.size() != 1 || val[0] < 'a' || val[0] > 'd')
                    fail(line, "unknown scenario layout id '" + val + "'");
                spec.layout = val[0];
                have_layout = true;
            } else if (key == "duration_s") {
                spec.duration = numbers(val, line, 1, key)[0];
                if (spec.duration <= 0) fail(line, "duration_s must be > 0");
                have_duration = true;
            } else if (key == "nominal_speed_mps") {
                spec.nominal_speed = numbers(val, line, 1, key)[0];
                if (spec.nominal_speed <= 0)
                    fail(line, "nominal_speed_mps must be > 0");
                have_nominal = true;
            } else if (key == "intended_distance_m") {
                spec.intended_distance = numbers(val, line, 1, key)[0];
                have_intended = true;
            } else if (key == "seed") {
                spec.seed = static_cast<std::uint64_t>(
                    numbers(val, line, 1, key)[0]);
            } else if (key == "marking_offset_m") {
                spec.lane_markings.push_back(numbers(val, line, 1, key)[0]);
            } else {
                fail(line, "unknown key '" + key + "'");
            }
            continue;
        }

        // actor sections
        if (key == "p1") {
            if (section == Section::Ev)
                fail(line, "the ego position is fixed at the origin");
            const auto v = numbers(val, line, 2, key);
            actor->x0 = v[0];
            actor->y0 = v[1];
            ov_p1.back() = true;
        } else if (key == "p2") {
            const auto v = numbers(val, line, 2, key);
            actor->speed0 = v[0];
            actor->heading0_deg = v[1];
            if (section == Section::Ev)
                ev_p2 = true;
            else
                ov_p2.back() = true;
        } else if (key == "p3") {
            const auto v = numbers(val, line, 2, key);
            actor->accel_s = v[0];
            actor->accel_d = v[1];
        } else if (key == "waypoint") {
            const auto v = numbers(val, line, 2, key);
            actor->route.push_back(Vec2{v[0], v[1]});
        } else {
            fail(line, "unknown key '" + key + "'");
        }
    }

    if (spec.name.empty()) throw ScenarioParseError("missing field 'name'");
    if (!have_layout) throw ScenarioParseError("missing field 'layout'");
    if (!have_duration)
        throw ScenarioParseError("missing field 'duration_s'");
    if (!have_nominal)
        throw ScenarioParseError("missing field 'nominal_speed_mps'");
    if (!have_intended)
        throw ScenarioParseError("missing field 'intended_distance_m'");
    if (!have_ev) throw ScenarioParseError("missing [ev] section");
    if (!ev_p2) throw ScenarioParseError("missing field 'p2' in [ev]");
    if (spec.ev.route.size() < 2)
        throw ScenarioParseError("[ev] needs at least two waypoints");
    for (std::size_t i = 0; i < spec.obstacles.size(); ++i) {
        const std::string which = "[ov] #" + std::to_string(i + 1);
        if (!ov_p1[i])
            throw ScenarioParseError("missing field 'p1' in " + which);
        if (!ov_p2[i])
            throw ScenarioParseError("missing field 'p2' in " + which);
        if (spec.obstacles[i].route.size() < 2)
            throw ScenarioParseError(which + " needs at least two waypoints");
    }
    return spec;
}

ScenarioSpec parse_scenario_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ScenarioParseError("cannot open scenario file: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_scenario_text(ss.str());
}

std::string serialize_scenario(const ScenarioSpec& spec) {
    std::ostringstream o;
    o << "schema_version 1\n";
    o << "name " << spec.name << "\n";
    o << "layout " << spec.layout << "\n";
    o << "duration_s " << fmt(spec.duration) << "\n";
    o << "nominal_speed_mps " << fmt(spec.nominal_speed) << "\n";
    o << "intended_distance_m " << fmt(spec.intended_distance) << "\n";
    o << "seed " << spec.seed << "\n";
    for (double m : spec.lane_markings)
        o << "marking_offset_m " << fmt(m) << "\n";
    o << "\n[ev]\n";
    o << "p2 " << fmt(spec.ev.speed0) << " " << fmt(spec.ev.heading0_deg)
      << "\n";
    for (const auto& w : spec.ev.route)
        o << "waypoint " << fmt(w.x) << " " << fmt(w.y) << "\n";
    for (const auto& ov : spec.obstacles) {
        o << "\n[ov]\n";
        o << "p1 " << fmt(ov.x0) << " " << fmt(ov.y0) << "\n";
        o << "p2 " << fmt(ov.speed0) << " " << fmt(ov.heading0_deg) << "\n";
        o << "p3 " << fmt(ov.accel_s) << " " << fmt(ov.accel_d) << "\n";
        for (const auto& w : ov.route)
            o << "waypoint " << fmt(w.x) << " " << fmt(w.y) << "\n";
    }
    return o.str();
}

} // namespace flowplan
