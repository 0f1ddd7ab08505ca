#pragma once

#include <string_view>

namespace fixtures {

inline constexpr std::string_view kIsEqual = R"(public static boolean isEqual(int a, int b) {
    if (a == b) {
        return true;
    } else {
        return false;
    }
})";

inline constexpr std::string_view kIsEqualSwapped = R"(public static boolean isEqual(int a, int b) {
    if (a != b) {
        return false;
    } else {
        return true;
    }
})";

inline constexpr std::string_view kIsReciprocalOf = R"(public final boolean isReciprocalOf(final Dimension that) {
    final Factor[] theseFactors = _factors;
    final Factor[] thoseFactors = that._factors;
    boolean isReciprocalOf;
    if (theseFactors.length != thoseFactors.length) {
        isReciprocalOf = false;
    } else {
        int i;
        for (i = theseFactors.length; --i >= 0;) {
            if (!theseFactors[i].isReciprocalOf(thoseFactors[i])) {
                break;
            }
        }
        isReciprocalOf = i < 0;
    }
    return isReciprocalOf;
})";

inline constexpr std::string_view kIsReciprocalOfSwapped = R"(public final boolean isReciprocalOf(final Dimension that) {
    final Factor[] theseFactors = _factors;
    final Factor[] thoseFactors = that._factors;
    boolean isReciprocalOf;
    if (theseFactors.length == thoseFactors.length) {
        int i;
        for (i = theseFactors.length; --i >= 0;) {
            if (!theseFactors[i].isReciprocalOf(thoseFactors[i])) {
                break;
            }
        }
        isReciprocalOf = i < 0;
    } else {
        isReciprocalOf = false;
    }
    return isReciprocalOf;
})";

inline constexpr std::string_view kFindInsertionPoint = R"(protected int findInsertionPoint(final E o, int low, int high) {
    while (low <= high) {
        int mid = (low + high) >>> 1;
        int delta = compare(get(mid), o);
        if (delta > 0) {
            high = mid - 1;
        } else {
            low = mid + 1;
        }
    }
    return low;
})";

inline constexpr std::string_view kFindInsertionPointSwapped = R"(protected int findInsertionPoint(final E o, int low, int high) {
    while (high >= low) {
        int mid = (low + high) >>> 1;
        int delta = compare(get(mid), o);
        if (delta > 0) {
            high = mid - 1;
        } else {
            low = mid + 1;
        }
    }
    return low;
})";

}  // namespace fixtures
