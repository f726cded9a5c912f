#include "flowplan/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace flowplan {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

std::ofstream open_out(const fs::path& p) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    return f;
}

void write_steps_csv(const RunLog& log, const fs::path& p) {
    auto f = open_out(p);
    f << "# flowplan-log v1\n";
    f << "step,time_s,x_m,y_m,psi_rad,u_mps,v_mps,r_radps,s_m,d_m,"
         "fx_n,delta_rad,sat_fx,sat_delta,udot_mps2,vdot_mps2,"
         "j1,j2,j3,j4,selected,feasible_candidates,inv_ttc_sum_1ps,"
         "min_ttc_s,min_ov_dist_m\n";
    for (std::size_t i = 0; i < log.steps.size(); ++i) {
        const StepRecord& s = log.steps[i];
        double min_dist = -1.0;
        for (double d : s.ov_distance)
            if (min_dist < 0.0 || d < min_dist) min_dist = d;
        f << i << ',' << num(s.sim_time) << ',' << num(s.ev.x) << ','
          << num(s.ev.y) << ',' << num(s.ev.psi) << ',' << num(s.ev.u) << ','
          << num(s.ev.v) << ',' << num(s.ev.r) << ',' << num(s.ev_s) << ','
          << num(s.ev_d) << ',' << num(s.control.fx) << ','
          << num(s.control.delta) << ',' << (s.control.saturation.fx ? 1 : 0)
          << ',' << (s.control.saturation.delta ? 1 : 0) << ','
          << num(s.accel.u_dot) << ',' << num(s.accel.v_dot) << ','
          << num(s.cost.j1) << ',' << num(s.cost.j2) << ',' << num(s.cost.j3)
          << ',' << num(s.cost.j4) << ',' << s.selected << ','
          << s.feasible_candidates << ',' << num(s.inv_ttc_sum) << ','
          << num(s.min_ttc) << ',' << num(min_dist) << '\n';
    }
}

void write_timing_csv(const RunLog& log, const fs::path& p) {
    auto f = open_out(p);
    f << "# flowplan-timing v1 (wall clock; varies between runs)\n";
    f << "step,ms_domain,ms_solve,ms_sample,ms_select,ms_total,"
         "lbm_iterations,lbm_converged,mlups\n";
    for (std::size_t i = 0; i < log.steps.size(); ++i) {
        const StepRecord& s = log.steps[i];
        const double total =
            s.ms_domain + s.ms_solve + s.ms_sample + s.ms_select;
        f << i << ',' << num(s.ms_domain) << ',' << num(s.ms_solve) << ','
          << num(s.ms_sample) << ',' << num(s.ms_select) << ',' << num(total)
          << ',' << s.lbm_iterations << ',' << (s.lbm_converged ? 1 : 0)
          << ',' << num(s.mlups) << '\n';
    }
}

void write_kpi_json(const RunLog& log, const fs::path& p) {
    json j;
    j["schema"] = "flowplan-kpi v1";
    j["scenario"] = log.scenario;
    j["seed"] = log.seed;
    j["steps"] = log.kpi.steps;
    j["collision"] = log.collision;
    j["collision_time_s"] = log.collision_time;
    j["reached_goal"] = log.reached_goal;
    j["left_road"] = log.left_road;
    j["kpi"]["k_s_per_s"] = log.kpi.k_s;
    j["kpi"]["k_c_g"] = log.kpi.k_c_g;
    j["kpi"]["k_f"] = log.kpi.k_f;
    j["kpi"]["mean_abs_force_kn"] = log.kpi.mean_abs_force_kn;
    j["kpi"]["min_speed_mps"] = log.kpi.min_speed;
    j["kpi"]["max_abs_lat_acc_g"] = log.kpi.max_abs_lat_acc_g;
    j["kpi"]["progress"] = log.kpi.progress;
    j["kpi"]["steering_saturated"] = log.kpi.steering_saturated;
    j["kpi"]["force_saturated"] = log.kpi.force_saturated;
    j["timing_ms"]["domain"] = log.kpi.mean_ms_domain;
    j["timing_ms"]["solve"] = log.kpi.mean_ms_solve;
    j["timing_ms"]["sample"] = log.kpi.mean_ms_sample;
    j["timing_ms"]["select"] = log.kpi.mean_ms_select;
    j["timing_ms"]["step_total"] = log.kpi.mean_ms_step;
    j["mean_mlups"] = log.kpi.mean_mlups;
    auto f = open_out(p);
    f << j.dump(2) << '\n';
}

// --- minimal SVG helpers ---------------------------------------------

struct SvgCanvas {
    std::ostringstream body;
    double w, h;
    SvgCanvas(double w_, double h_) : w(w_), h(h_) {}
    std::string finish(const std::string& title) {
        std::ostringstream o;
        o << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w
          << "' height='" << h << "' viewBox='0 0 " << w << " " << h
          << "'>\n<rect width='100%' height='100%' fill='white'/>\n"
          << "<text x='10' y='18' font-size='14' font-family='sans-serif'>"
          << title << "</text>\n"
          << body.str() << "</svg>\n";
        return o.str();
    }
};

struct Mapper {
    double x0, x1, y0, y1; // data range
    double px0, px1, py0, py1; // pixel range (py grows downward)
    double mx(double x) const {
        return px0 + (x - x0) / (x1 - x0 + 1e-30) * (px1 - px0);
    }
    double my(double y) const {
        return py1 - (y - y0) / (y1 - y0 + 1e-30) * (py1 - py0);
    }
};

void polyline(SvgCanvas& c, const Mapper& m, const std::vector<double>& xs,
              const std::vector<double>& ys, const char* color) {
    c.body << "<polyline fill='none' stroke='" << color
           << "' stroke-width='1.2' points='";
    for (std::size_t i = 0; i < xs.size(); ++i)
        c.body << m.mx(xs[i]) << "," << m.my(ys[i]) << " ";
    c.body << "'/>\n";
}

void axis_box(SvgCanvas& c, const Mapper& m, const std::string& xlabel,
              const std::string& ylabel) {
    c.body << "<rect x='" << m.px0 << "' y='" << m.py0 << "' width='"
           << (m.px1 - m.px0) << "' height='" << (m.py1 - m.py0)
           << "' fill='none' stroke='black' stroke-width='0.8'/>\n";
    c.body << "<text x='" << (m.px0 + m.px1) / 2 << "' y='" << (m.py1 + 28)
           << "' font-size='11' text-anchor='middle' "
              "font-family='sans-serif'>"
           << xlabel << "</text>\n";
    c.body << "<text x='" << (m.px0 - 30) << "' y='" << (m.py0 + m.py1) / 2
           << "' font-size='11' text-anchor='middle' "
              "font-family='sans-serif' transform='rotate(-90 "
           << (m.px0 - 30) << " " << (m.py0 + m.py1) / 2 << ")'>" << ylabel
           << "</text>\n";
}

void write_traces_svg(const RunLog& log, const fs::path& p) {
    std::vector<double> t, u, fx, delta, vdot;
    for (const auto& s : log.steps) {
        t.push_back(s.sim_time);
        u.push_back(s.ev.u);
        fx.push_back(s.control.fx / 1000.0);
        delta.push_back(s.control.delta * 180.0 / 3.14159265358979323846);
        vdot.push_back(s.accel.v_dot);
    }
    if (t.empty()) {
        open_out(p) << SvgCanvas(400, 100).finish("no steps logged");
        return;
    }
    auto range = [](const std::vector<double>& v, double& lo, double& hi) {
        lo = v[0]; hi = v[0];
        for (double x : v) { lo = std::min(lo, x); hi = std::max(hi, x); }
        if (hi - lo < 1e-9) { hi += 1.0; lo -= 1.0; }
    };
    SvgCanvas c(860, 640);
    const char* names[4] = {"speed [m/s]", "F_x [kN]", "steering [deg]",
                            "lateral accel [m/s^2]"};
    const std::vector<double>* series[4] = {&u, &fx, &delta, &vdot};
    const char* colors[4] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
    for (int i = 0; i < 4; ++i) {
        double lo, hi;
        range(*series[i], lo, hi);
        Mapper m{t.front(), t.back(), lo, hi,
                 60.0, 820.0, 40.0 + 150.0 * i, 160.0 + 150.0 * i};
        axis_box(c, m, i == 3 ? "time [s]" : "", names[i]);
        polyline(c, m, t, *series[i], colors[i]);
    }
    open_out(p) << c.finish("control and speed traces: " + log.scenario);
}

void write_trajectory_svg(const RunLog& log, const fs::path& p) {
    std::vector<double> s, d, t;
    for (const auto& rec : log.steps) {
        s.push_back(rec.ev_s);
        d.push_back(rec.ev_d);
        t.push_back(rec.sim_time);
    }
    if (s.empty()) {
        open_out(p) << SvgCanvas(400, 100).finish("no steps logged");
        return;
    }
    double slo = s[0], shi = s[0], dlo = -4, dhi = 4;
    for (double x : s) { slo = std::min(slo, x); shi = std::max(shi, x); }
    SvgCanvas c(860, 280);
    Mapper m{slo, shi, dlo, dhi, 60.0, 820.0, 40.0, 230.0};
    axis_box(c, m, "s [m]", "d [m]");
    polyline(c, m, s, d, "#ff7f0e");
    open_out(p) << c.finish("driven path in route coordinates: " +
                            log.scenario);
}

void write_quiver_svg(const FieldSlice& slice, const std::string& title,
                      const std::string& xlabel, const std::string& ylabel,
                      const fs::path& p) {
    if (slice.width == 0 || slice.height == 0) {
        open_out(p) << SvgCanvas(400, 100).finish("empty slice");
        return;
    }
    SvgCanvas c(900, 500);
    Mapper m{0, double(slice.width), 0, double(slice.height),
             60.0, 860.0, 40.0, 450.0};
    axis_box(c, m, xlabel, ylabel);
    const int step_x = std::max(1, slice.width / 64);
    const int step_y = std::max(1, slice.height / 32);
    for (int j = 0; j < slice.height; j += step_y)
        for (int i = 0; i < slice.width; i += step_x) {
            const double vx = slice.vx[j * slice.width + i];
            const double vy = slice.vy[j * slice.width + i];
            const double x0 = m.mx(i + 0.5);
            const double y0 = m.my(j + 0.5);
            const double x1 = x0 + vx * 10.0;
            const double y1 = y0 - vy * 10.0;
            const bool zero = std::abs(vx) + std::abs(vy) < 1e-9;
            if (zero) {
                c.body << "<circle cx='" << x0 << "' cy='" << y0
                       << "' r='1.2' fill='#888'/>\n";
            } else {
                c.body << "<line x1='" << x0 << "' y1='" << y0 << "' x2='"
                       << x1 << "' y2='" << y1
                       << "' stroke='#1f77b4' stroke-width='0.8'/>\n"
                       << "<circle cx='" << x1 << "' cy='" << y1
                       << "' r='1.0' fill='#1f77b4'/>\n";
            }
        }
    open_out(p) << c.finish(title);
}

void write_slice_csv(const FieldSlice& slice, const char* axes,
                     const fs::path& p) {
    auto f = open_out(p);
    f << "# flowplan-field-slice v1 axes=" << axes << "\n";
    f << "i,j,vx,vy\n";
    for (int j = 0; j < slice.height; ++j)
        for (int i = 0; i < slice.width; ++i)
            f << i << ',' << j << ',' << num(slice.vx[j * slice.width + i])
              << ',' << num(slice.vy[j * slice.width + i]) << '\n';
}

} // namespace

std::vector<std::string> emit_reports(const RunLog& log,
                                      const std::string& out_dir,
                                      const ReportOptions& opts) {
    fs::path dir(out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (!fs::is_directory(dir))
        throw std::runtime_error("cannot create output directory " + out_dir);

    std::vector<std::string> written;
    auto track = [&](const fs::path& p) { written.push_back(p.string()); };

    write_steps_csv(log, dir / "steps.csv");
    track(dir / "steps.csv");
    write_timing_csv(log, dir / "timing.csv");
    track(dir / "timing.csv");
    write_kpi_json(log, dir / "kpi.json");
    track(dir / "kpi.json");

    if (opts.plots) {
        write_traces_svg(log, dir / "traces.svg");
        track(dir / "traces.svg");
        write_trajectory_svg(log, dir / "trajectory.svg");
        track(dir / "trajectory.svg");
        write_quiver_svg(log.slice_sd, "field slice near t=0 (s-d plane)",
                         "s cell", "d cell", dir / "stvf_sd.svg");
        track(dir / "stvf_sd.svg");
        write_quiver_svg(log.slice_st, "field slice at the ego lane (s-t plane)",
                         "s cell", "t cell", dir / "stvf_st.svg");
        track(dir / "stvf_st.svg");
    }
    if (opts.oracle_dump) {
        write_slice_csv(log.slice_sd, "s,d", dir / "stvf_sd.csv");
        track(dir / "stvf_sd.csv");
        write_slice_csv(log.slice_st, "s,t", dir / "stvf_st.csv");
        track(dir / "stvf_st.csv");
    }
    return written;
}

std::vector<std::string> emit_batch_summary(const std::vector<BatchEntry>& runs,
                                            const std::string& out_dir) {
    fs::path dir(out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (!fs::is_directory(dir))
        throw std::runtime_error("cannot create output directory " + out_dir);

    std::vector<std::string> written;
    {
        auto f = open_out(dir / "summary.csv");
        f << "# flowplan-batch v1\n";
        f << "scenario,k_s_per_s,k_c_g,k_f,mean_abs_force_kn,min_speed_mps,"
             "progress,collision,reached_goal,mean_ms_step\n";
        KpiReport avg;
        bool any_collision = false;
        for (const auto& r : runs) {
            f << r.scenario << ',' << num(r.kpi.k_s) << ',' << num(r.kpi.k_c_g)
              << ',' << num(r.kpi.k_f) << ',' << num(r.kpi.mean_abs_force_kn)
              << ',' << num(r.kpi.min_speed) << ',' << num(r.kpi.progress)
              << ',' << (r.collision ? 1 : 0) << ',' << (r.reached_goal ? 1 : 0)
              << ',' << num(r.kpi.mean_ms_step) << '\n';
            avg.k_s += r.kpi.k_s;
            avg.k_c_g += r.kpi.k_c_g;
            avg.k_f += r.kpi.k_f;
            avg.mean_abs_force_kn += r.kpi.mean_abs_force_kn;
            avg.min_speed += r.kpi.min_speed;
            avg.progress += r.kpi.progress;
            avg.mean_ms_step += r.kpi.mean_ms_step;
            any_collision |= r.collision;
        }
        if (!runs.empty()) {
            const double n = static_cast<double>(runs.size());
            f << "average," << num(avg.k_s / n) << ',' << num(avg.k_c_g / n)
              << ',' << num(avg.k_f / n) << ','
              << num(avg.mean_abs_force_kn / n) << ','
              << num(avg.min_speed / n) << ',' << num(avg.progress / n) << ','
              << (any_collision ? 1 : 0) << ",," << num(avg.mean_ms_step / n)
              << '\n';
        }
        written.push_back((dir / "summary.csv").string());
    }
    {
        json j;
        j["schema"] = "flowplan-batch v1";
        json rows = json::array();
        KpiReport avg;
        for (const auto& r : runs) {
            json row;
            row["scenario"] = r.scenario;
            row["k_s_per_s"] = r.kpi.k_s;
            row["k_c_g"] = r.kpi.k_c_g;
            row["k_f"] = r.kpi.k_f;
            row["mean_abs_force_kn"] = r.kpi.mean_abs_force_kn;
            row["min_speed_mps"] = r.kpi.min_speed;
            row["progress"] = r.kpi.progress;
            row["collision"] = r.collision;
            row["reached_goal"] = r.reached_goal;
            row["mean_ms_step"] = r.kpi.mean_ms_step;
            rows.push_back(row);
            avg.k_s += r.kpi.k_s;
            avg.k_c_g += r.kpi.k_c_g;
            avg.k_f += r.kpi.k_f;
            avg.mean_abs_force_kn += r.kpi.mean_abs_force_kn;
        }
        j["runs"] = rows;
        if (!runs.empty()) {
            const double n = static_cast<double>(runs.size());
            j["average"]["k_s_per_s"] = avg.k_s / n;
            j["average"]["k_c_g"] = avg.k_c_g / n;
            j["average"]["k_f"] = avg.k_f / n;
            j["average"]["mean_abs_force_kn"] = avg.mean_abs_force_kn / n;
        }
        auto f = open_out(dir / "summary.json");
        f << j.dump(2) << '\n';
        written.push_back((dir / "summary.json").string());
    }
    return written;
}

} // namespace flowplan
