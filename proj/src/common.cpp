#include "routedet/common.hpp"

#include <charconv>
#include <cmath>
#include <thread>

namespace routedet {

std::string fmt_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
    if (workers < 1) workers = 1;
    std::size_t w = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
    if (w <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> threads;
    threads.reserve(w);
    for (std::size_t t = 0; t < w; ++t) {
        threads.emplace_back([&, t] {
            for (std::size_t i = t; i < n; i += w) fn(i);
        });
    }
    for (auto& th : threads) th.join();
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

}  // namespace routedet
