#include <selfsense/trace_io.hpp>

#include <cstdio>
#include <ostream>

namespace selfsense {

std::string format_number(double value)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", value);
    return buf;
}

std::string trace_csv_header()
{
    std::string h = "t,x,y,x_hat,y_hat,x_hat_raw,y_hat_raw";
    for (int k = 1; k <= kTeeth; ++k)
        h += ",i" + std::to_string(k);
    for (int k = 1; k <= kTeeth; ++k)
        h += ",v" + std::to_string(k);
    h += ",fx,fy,u_x,u_y,u_d,u_q,i_u_star,i_v_star,i_w_star,saturated,touchdown,gap_clamp";
    return h;
}

void write_trace_csv(std::ostream& out, std::span<const TraceRecord> trace)
{
    out << trace_csv_header() << '\n';
    for (const auto& r : trace) {
        std::string line = format_number(r.t);
        auto add = [&line](double v) {
            line += ',';
            line += format_number(v);
        };
        for (double v : {r.x, r.y, r.x_hat, r.y_hat, r.x_hat_raw, r.y_hat_raw})
            add(v);
        for (int k = 0; k < kTeeth; ++k)
            add(r.current[k]);
        for (int k = 0; k < kTeeth; ++k)
            add(r.voltage[k]);
        for (double v : {r.fx, r.fy, r.u_x, r.u_y, r.u_d, r.u_q, r.i_u, r.i_v, r.i_w})
            add(v);
        line += r.saturated ? ",1" : ",0";
        line += r.touchdown ? ",1" : ",0";
        line += r.gap_clamp ? ",1" : ",0";
        out << line << '\n';
    }
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows)
{
    out << "x_true,x_hat_raw,y_hat_raw\n";
    for (const auto& r : rows)
        out << format_number(r.x_true) << ',' << format_number(r.x_hat_raw) << ','
            << format_number(r.y_hat_raw) << '\n';
}

void write_summary(std::ostream& out, const RunSummary& s)
{
    auto kv = [&out](const char* key, const std::string& value) { out << key << " = " << value << '\n'; };
    auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string("none"); };

    kv("scenario", to_string(s.kind));
    kv("feedback", to_string(s.feedback));
    kv("records", std::to_string(s.records));
    kv("simulated_time", format_number(s.simulated_time));
    kv("touchdown", s.touchdown ? "true" : "false");
    if (s.touchdown)
        kv("touchdown_time", format_number(s.touchdown_time));
    kv("settling_time", opt(s.settling_time));
    kv("overshoot", format_number(s.overshoot));
    kv("estimation_error_rms", format_number(s.estimation_error_rms));
    kv("final_x", format_number(s.final_x));
    kv("final_y", format_number(s.final_y));
    kv("max_radial_displacement", format_number(s.max_radial_displacement));
    kv("max_coil_current", format_number(s.max_coil_current));
    kv("saturated_fraction", format_number(s.saturated_fraction));
    if (s.kind == ScenarioKind::DisturbanceRejection) {
        kv("peak_deviation_after_disturbance", format_number(s.peak_deviation_after_disturbance));
        kv("recovery_time", opt(s.recovery_time));
    }
    if (s.calibration_x) {
        kv("calibration_gain_x", format_number(s.calibration_x->calibration.gain));
        kv("calibration_offset_x", format_number(s.calibration_x->calibration.offset));
        kv("calibration_residual_rms_x", format_number(s.calibration_x->residual_rms));
    }
    if (s.calibration_y) {
        kv("calibration_gain_y", format_number(s.calibration_y->calibration.gain));
        kv("calibration_offset_y", format_number(s.calibration_y->calibration.offset));
        kv("calibration_residual_rms_y", format_number(s.calibration_y->residual_rms));
    }
}

}  // namespace selfsense
