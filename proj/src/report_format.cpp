#include "kgsys/report_format.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

namespace kgsys {

std::string format_number(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    std::ostringstream ss;
    ss.precision(10);
    ss << value;
    return ss.str();
}

CsvWriter::CsvWriter(std::ostream& os, const std::vector<std::string>& columns, const std::string& comment)
    : os_(os) {
    if (!comment.empty()) os_ << "# " << comment << '\n';
    for (std::size_t i = 0; i < columns.size(); ++i) os_ << (i ? "," : "") << columns[i];
    os_ << '\n';
}

CsvWriter& CsvWriter::operator<<(double value) { return *this << format_number(value); }

CsvWriter& CsvWriter::operator<<(const std::string& value) {
    if (row_started_) os_ << ',';
    os_ << value;
    row_started_ = true;
    return *this;
}

void CsvWriter::end_row() {
    os_ << '\n';
    row_started_ = false;
}

} // namespace kgsys
