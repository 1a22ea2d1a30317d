#pragma once

// Number formatting and CSV conventions shared by every report writer:
// 10 significant digits, a '#' comment line, then a header row.

#include <iosfwd>
#include <string>
#include <vector>

namespace kgsys {

std::string format_number(double value);

class CsvWriter {
public:
    CsvWriter(std::ostream& os, const std::vector<std::string>& columns, const std::string& comment = {});

    CsvWriter& operator<<(double value);
    CsvWriter& operator<<(const std::string& value);
    CsvWriter& operator<<(const char* value) { return *this << std::string(value); }
    void end_row();

private:
    std::ostream& os_;
    bool row_started_ = false;
};

} // namespace kgsys
