#include "tfheval/report.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <iomanip>
#include <set>
#include <sstream>

#include "tfheval/records.hpp"

namespace tfheval {

namespace fs = std::filesystem;
using json = nlohmann::json;

ReportFormat report_format_from_string(std::string_view s) {
    if (s == "csv") return ReportFormat::csv;
    if (s == "md" || s == "markdown") return ReportFormat::markdown;
    if (s == "jsonl" || s == "jsonl-summary") return ReportFormat::jsonl_summary;
    throw std::invalid_argument("unknown report format: " + std::string(s));
}

AggregateReport load_report(const fs::path& records_file) {
    const auto records = read_run_records(records_file);
    return aggregate(records);
}

namespace {

std::string num(const std::optional<double>& v) {
    if (!v) return "";
    std::ostringstream os;
    os << std::fixed << std::setprecision(4) << *v;
    return os.str();
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string md_cell(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '|') out += '\\';
        out += c;
    }
    return out;
}

struct Column {
    const char* name;
    std::function<std::string(const AggregateRow&)> value;
};

const std::vector<Column>& columns() {
    static const std::vector<Column> cols = {
        {"task_id", [](const AggregateRow& r) { return r.task_id; }},
        {"model_id", [](const AggregateRow& r) { return r.model_id; }},
        {"method", [](const AggregateRow& r) { return r.method; }},
        {"runs", [](const AggregateRow& r) { return std::to_string(r.runs); }},
        {"errored_runs", [](const AggregateRow& r) { return std::to_string(r.errored_runs); }},
        {"mean_crystal_bleu", [](const AggregateRow& r) { return num(r.mean_crystal_bleu); }},
        {"pass_at_1_comp", [](const AggregateRow& r) { return num(r.pass_at_1_comp); }},
        {"pass_at_1_func", [](const AggregateRow& r) { return num(r.pass_at_1_func); }},
        {"wrong_format_rate", [](const AggregateRow& r) { return num(r.wrong_format_rate); }},
        {"repetition_rate", [](const AggregateRow& r) { return num(r.repetition_rate); }},
        {"iterations", [](const AggregateRow& r) { return std::to_string(r.iterations); }},
        {"input_tokens", [](const AggregateRow& r) { return std::to_string(r.input_tokens); }},
        {"output_tokens", [](const AggregateRow& r) { return std::to_string(r.output_tokens); }},
    };
    return cols;
}

}  // namespace

std::string render_csv(const AggregateReport& report) {
    std::ostringstream os;
    const auto& cols = columns();
    for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i].name;
    os << '\n';
    for (const auto& row : report.rows) {
        for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << csv_field(cols[i].value(row));
        os << '\n';
    }
    return os.str();
}

std::string render_markdown(const AggregateReport& report) {
    std::ostringstream os;
    const auto& cols = columns();
    os << '|';
    for (const auto& c : cols) os << ' ' << c.name << " |";
    os << "\n|";
    for (std::size_t i = 0; i < cols.size(); ++i) os << (i < 3 ? " --- |" : " ---: |");
    os << '\n';
    for (const auto& row : report.rows) {
        os << '|';
        for (const auto& c : cols) os << ' ' << md_cell(c.value(row)) << " |";
        os << '\n';
    }
    const auto errored = report.metadata.value("errored_records", 0);
    if (errored > 0) {
        os << "\n" << errored << " errored run(s) were excluded from the metrics above.\n";
    }
    os << "\nSettings: `" << report.metadata.dump() << "`\n";
    return os.str();
}

std::string render_jsonl_summary(const AggregateReport& report) {
    std::string out = json{{"metadata", report.metadata}}.dump() + "\n";
    for (const auto& row : report.rows) out += to_json(row).dump() + "\n";
    return out;
}

std::string render(const AggregateReport& report, ReportFormat format) {
    switch (format) {
        case ReportFormat::csv: return render_csv(report);
        case ReportFormat::markdown: return render_markdown(report);
        case ReportFormat::jsonl_summary: return render_jsonl_summary(report);
    }
    return {};
}

// ---- SVG plots --------------------------------------------------------------

namespace {

struct Panel {
    std::string title;
    std::function<std::optional<double>(const AggregateRow&)> value;
};

std::string xml_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string file_stem(std::string_view model) {
    std::string out;
    for (char c : model) out += std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.' ? c : '_';
    return out;
}

constexpr const char* kPalette[] = {"#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2", "#edc948"};

// Bars are scaled to [0, 1]; every metric plotted here is a rate or a score in that range.
std::string render_panels(const std::string& model, const std::vector<const AggregateRow*>& rows,
                          const std::vector<Panel>& panels) {
    std::vector<std::string> tasks, methods;
    for (const auto* r : rows) {
        if (std::find(tasks.begin(), tasks.end(), r->task_id) == tasks.end()) tasks.push_back(r->task_id);
        if (std::find(methods.begin(), methods.end(), r->method) == methods.end()) methods.push_back(r->method);
    }
    auto lookup = [&](const std::string& task, const std::string& method) -> const AggregateRow* {
        for (const auto* r : rows) {
            if (r->task_id == task && r->method == method) return r;
        }
        return nullptr;
    };

    const double panel_w = 80.0 + 90.0 * static_cast<double>(tasks.size());
    const double panel_h = 260.0;
    const double plot_top = 40.0, plot_h = 170.0, plot_left = 45.0;
    const double width = panel_w * static_cast<double>(panels.size());
    const double height = panel_h + 30.0 + 18.0 * static_cast<double>(methods.size());

    std::ostringstream os;
    os << std::fixed << std::setprecision(1);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
       << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (std::size_t p = 0; p < panels.size(); ++p) {
        const double x0 = panel_w * static_cast<double>(p);
        const char letter = static_cast<char>('a' + p);
        os << "<text x=\"" << x0 + panel_w / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"13\">(" << letter
           << ") " << xml_escape(panels[p].title) << "</text>\n";
        const double ax = x0 + plot_left;
        const double ay = plot_top + plot_h;
        os << "<line x1=\"" << ax << "\" y1=\"" << plot_top << "\" x2=\"" << ax << "\" y2=\"" << ay
           << "\" stroke=\"black\"/>\n";
        os << "<line x1=\"" << ax << "\" y1=\"" << ay << "\" x2=\"" << x0 + panel_w - 10 << "\" y2=\"" << ay
           << "\" stroke=\"black\"/>\n";
        for (int t = 0; t <= 4; ++t) {
            const double y = ay - plot_h * t / 4.0;
            os << "<text x=\"" << ax - 4 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">" << t * 0.25 << "</text>\n";
        }
        const double group_w = 90.0;
        const double bar_w = (group_w - 20.0) / std::max<double>(1.0, static_cast<double>(methods.size()));
        for (std::size_t t = 0; t < tasks.size(); ++t) {
            const double gx = ax + 10.0 + group_w * static_cast<double>(t);
            for (std::size_t m = 0; m < methods.size(); ++m) {
                const auto* row = lookup(tasks[t], methods[m]);
                const auto v = row ? panels[p].value(*row) : std::nullopt;
                if (!v) continue;
                const double h = plot_h * std::clamp(*v, 0.0, 1.0);
                os << "<rect x=\"" << gx + bar_w * static_cast<double>(m) << "\" y=\"" << ay - h << "\" width=\""
                   << bar_w - 1 << "\" height=\"" << h << "\" fill=\"" << kPalette[m % std::size(kPalette)]
                   << "\"><title>" << xml_escape(tasks[t] + " / " + methods[m]) << ": " << std::setprecision(4)
                   << *v << std::setprecision(1) << "</title></rect>\n";
            }
            os << "<text x=\"" << gx + (group_w - 20.0) / 2 << "\" y=\"" << ay + 15 << "\" text-anchor=\"middle\">"
               << xml_escape(tasks[t]) << "</text>\n";
        }
    }
    const double ly = panel_h + 10.0;
    os << "<text x=\"10\" y=\"" << ly << "\">model: " << xml_escape(model) << "</text>\n";
    for (std::size_t m = 0; m < methods.size(); ++m) {
        const double y = ly + 14.0 + 18.0 * static_cast<double>(m);
        os << "<rect x=\"10\" y=\"" << y - 9 << "\" width=\"10\" height=\"10\" fill=\""
           << kPalette[m % std::size(kPalette)] << "\"/>";
        os << "<text x=\"26\" y=\"" << y << "\">" << xml_escape(methods[m]) << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

void write_text(const fs::path& file, const std::string& text) {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) throw std::runtime_error("cannot write " + file.string());
}

}  // namespace

std::vector<fs::path> write_plots(const AggregateReport& report, const fs::path& dir) {
    fs::create_directories(dir);
    std::set<std::string> models;
    for (const auto& r : report.rows) models.insert(r.model_id);

    const std::vector<Panel> metric_panels = {
        {"CrystalBLEU", [](const AggregateRow& r) { return r.mean_crystal_bleu; }},
        {"Pass@1 (comp)", [](const AggregateRow& r) { return r.pass_at_1_comp; }},
        {"Pass@1 (func)", [](const AggregateRow& r) { return r.pass_at_1_func; }},
    };
    const std::vector<Panel> error_panels = {
        {"Wrong Format", [](const AggregateRow& r) { return r.wrong_format_rate; }},
        {"Repetition Error", [](const AggregateRow& r) { return r.repetition_rate; }},
    };

    std::vector<fs::path> written;
    for (const auto& model : models) {
        std::vector<const AggregateRow*> rows;
        for (const auto& r : report.rows) {
            if (r.model_id == model) rows.push_back(&r);
        }
        const auto metrics_file = dir / (file_stem(model) + "_metrics.svg");
        write_text(metrics_file, render_panels(model, rows, metric_panels));
        written.push_back(metrics_file);
        const auto errors_file = dir / (file_stem(model) + "_errors.svg");
        write_text(errors_file, render_panels(model, rows, error_panels));
        written.push_back(errors_file);
    }
    return written;
}

}  // namespace tfheval
