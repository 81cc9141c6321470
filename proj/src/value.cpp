#include "portbot/value.hpp"

#include <sstream>

namespace portbot {

std::string type_name(ValueType t)
{
    switch (t) {
    case ValueType::None: return "none";
    case ValueType::Bool: return "bool";
    case ValueType::Int: return "int";
    case ValueType::Real: return "real";
    case ValueType::Pos: return "pos";
    case ValueType::Region: return "region";
    }
    return "?";
}

std::string to_string(const Value& v)
{
    std::ostringstream os;
    std::visit(
        [&](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, std::monostate>)
                os << "none";
            else if constexpr (std::is_same_v<T, bool>)
                os << (x ? "true" : "false");
            else if constexpr (std::is_same_v<T, Region>)
                os << "region(" << x.boxes.size() << " boxes)";
            else
                os << x;
        },
        v);
    return os.str();
}

} // namespace portbot
