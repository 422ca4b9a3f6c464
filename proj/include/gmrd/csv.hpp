#ifndef GMRD_CSV_HPP
#define GMRD_CSV_HPP

#include <charconv>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace gmrd {

// Deterministic CSV: one header line, LF endings, floats rendered as the
// shortest decimal that round-trips (std::to_chars), so identical runs give
// byte-identical files.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& os) : os_(os) {}

  void header(const std::vector<std::string>& names) {
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (i) os_ << ',';
      os_ << names[i];
    }
    os_ << '\n';
  }

  class Row {
   public:
    explicit Row(std::ostream& os) : os_(os) {}
    ~Row() { os_ << '\n'; }
    Row(const Row&) = delete;
    Row& operator=(const Row&) = delete;

    Row& col(double v) {
      char buf[32];
      auto r = std::to_chars(buf, buf + sizeof buf, v);
      sep();
      os_.write(buf, r.ptr - buf);
      return *this;
    }
    Row& col(std::int64_t v) {
      char buf[24];
      auto r = std::to_chars(buf, buf + sizeof buf, v);
      sep();
      os_.write(buf, r.ptr - buf);
      return *this;
    }
    Row& col(int v) { return col(static_cast<std::int64_t>(v)); }
    Row& col(const std::string& v) {
      sep();
      os_ << v;
      return *this;
    }

   private:
    void sep() {
      if (!first_) os_ << ',';
      first_ = false;
    }
    std::ostream& os_;
    bool first_ = true;
  };

  Row row() { return Row(os_); }

 private:
  std::ostream& os_;
};

}  // namespace gmrd

#endif  // GMRD_CSV_HPP
