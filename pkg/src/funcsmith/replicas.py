"""Seed data: 21 hand-written replicas of common Python functions.

Each replica re-implements one widely used builtin (or math helper) under a
different name so that generated code can be constrained to call the replica
while the original name goes on the restricted list. Two sources are kept
deliberately quirky rather than "fixed": ``create_set`` returns a dict
key-view instead of a real set, and ``check_if_instance`` only looks one
subclass level deep. Callers that need exact builtin behavior should not
get it from these.
"""

from __future__ import annotations

GET_LENGTH = """\
def get_length(iterable):
    count = 0
    for _ in iterable:
        count += 1
    return count"""

CAST_TO_STRING = """\
def cast_to_string(input):
    return str(input)"""

CONVERT_TO_CHAR = """\
def convert_to_char(input):
    return chr(input)"""

CAST_TO_FLOAT = """\
def cast_to_float(input):
    return float(input)"""

CAST_TO_INT = """\
def cast_to_int(input):
    return int(input)"""

CREATE_LIST = """\
def create_list(iterable=None):
    if iterable is None:
        return []
    lst = []
    for item in iterable: lst.append(item)
    return lst"""

CREATE_SET = """\
def create_set(iterable=None):
    s = {}
    if iterable:
        for element in iterable: s[element] = None
    return s.keys()"""

CHECK_IF_INSTANCE = """\
def check_if_instance(obj, class_or_tuple):
    if not isinstance(class_or_tuple, tuple):
        class_or_tuple = (class_or_tuple,)
    for cls in class_or_tuple:
        if type(obj) == cls or type(obj) in cls.__subclasses__():
            return True
    return False"""

SORT_LIST = """\
def sort_list(iterable, key=None, reverse=False):
    lst = list(iterable)
    if key is None:
        compare = lambda a, b: a > b
    else:
        compare = lambda a, b: key(a) > key(b)
    for i in range(len(lst)):
        for j in range(len(lst) - 1):
            if compare(lst[j], lst[j + 1]):
                lst[j], lst[j + 1] = lst[j + 1], lst[j]
    if reverse:
        lst = lst[::-1]
    return lst"""

CHECK_IF_ALL_TRUE = """\
def check_if_all_true(iterable):
    for element in iterable:
        if not element:
            return False
    return True"""

GET_MINIMUM = """\
def get_minimum(*args):
    if len(args) == 1:
        args = args[0]
    if not args:
        raise TypeError('expected at least 1 arguments, got 0')
    min_val = args[0]
    for arg in args:
        if arg < min_val:
            min_val = arg
    return min_val"""

# Mirror of get_minimum with the comparison reversed.
GET_MAXIMUM = """\
def get_maximum(*args):
    if len(args) == 1:
        args = args[0]
    if not args:
        raise TypeError('expected at least 1 arguments, got 0')
    max_val = args[0]
    for arg in args:
        if arg > max_val:
            max_val = arg
    return max_val"""

CONVERT_TO_BINARY = """\
def convert_to_binary(n):
    if n < 0:
        return '-' + convert_to_binary(-n)
    result = ''
    while n:
        result = ('1' if n & 1 else '0') + result
        n >>= 1
    return '0b' + result if result else '0b0'"""

COMPUTE_SUM = """\
def compute_sum(iterable, start=0):
    total = start
    for item in iterable:
        total += item
    return total"""

ROUND_NUMBER = """\
def round_number(number, ndigits=None):
    if ndigits is None:
        return int(number + 0.5) if number >= 0 else int(number - 0.5)
    else:
        factor = 10.0 ** ndigits
        return int(number * factor + 0.5 if number >= 0 else number * factor - 0.5) / factor"""

GET_CEILING = """\
def get_ceiling(number):
    integer_part = int(number)
    if number == integer_part:
        return integer_part
    if number > 0:
        integer_part += 1
    return integer_part"""

GET_SQUARE_ROOT = """\
def get_square_root(input, precision = 0.00001):
    guess = input / 2.0
    while True:
        better_guess = (guess + input / guess) / 2.0
        if abs(guess - better_guess) < precision:
            return better_guess
        guess = better_guess"""

GET_UNICODE = """\
def get_unicode(char):
    if len(char) != 1:
        raise TypeError("Error.")
    return int.from_bytes(char.encode('utf-8'), byteorder='big')"""

APPLY_FUNC_TO_ITERABLE = """\
def apply_func_to_iterable(function, iterable):
    result = []
    for item in iterable:
        result.append(function(item))
    return result"""

ABSOLUTE_VALUE = """\
def absolute_value(number):
    if number < 0:
        return -number
    else:
        return number"""

ADD_TO_LIST_IF_FUNC_IS_TRUE = """\
def add_to_list_if_func_is_true(function, iterable):
    result = []
    for item in iterable:
        if function(item): result.append(item)
    return result"""


# (origin name, replica name, one-line summary, source)
REPLICAS: tuple[tuple[str, str, str, str], ...] = (
    ("len", "get_length", "Count the items in an iterable.", GET_LENGTH),
    ("str", "cast_to_string", "Convert a value to its string form.", CAST_TO_STRING),
    ("chr", "convert_to_char", "Map a code point to a one-character string.", CONVERT_TO_CHAR),
    ("float", "cast_to_float", "Convert a value to a float.", CAST_TO_FLOAT),
    ("int", "cast_to_int", "Convert a value to an integer.", CAST_TO_INT),
    ("list", "create_list", "Build a list from an iterable (empty list if none given).", CREATE_LIST),
    ("set", "create_set", "Collect the distinct elements of an iterable.", CREATE_SET),
    ("isinstance", "check_if_instance", "Test whether an object is of a class (or tuple of classes).", CHECK_IF_INSTANCE),
    ("sorted", "sort_list", "Return a sorted list, with optional key and reverse.", SORT_LIST),
    ("all", "check_if_all_true", "Test whether every element of an iterable is truthy.", CHECK_IF_ALL_TRUE),
    ("min", "get_minimum", "Smallest of several arguments or of one iterable.", GET_MINIMUM),
    ("max", "get_maximum", "Largest of several arguments or of one iterable.", GET_MAXIMUM),
    ("bin", "convert_to_binary", "Format an integer as a binary string with 0b prefix.", CONVERT_TO_BINARY),
    ("sum", "compute_sum", "Sum the elements of an iterable, plus an optional start value.", COMPUTE_SUM),
    ("round", "round_number", "Round a number, optionally to a given number of digits.", ROUND_NUMBER),
    ("math.ceil", "get_ceiling", "Smallest integer not less than a number.", GET_CEILING),
    ("math.sqrt", "get_square_root", "Square root by Newton iteration to a fixed precision.", GET_SQUARE_ROOT),
    ("ord", "get_unicode", "Numeric value of a one-character string.", GET_UNICODE),
    ("map", "apply_func_to_iterable", "Apply a function to every element, returning a list.", APPLY_FUNC_TO_ITERABLE),
    ("abs", "absolute_value", "Absolute value of a number.", ABSOLUTE_VALUE),
    ("filter", "add_to_list_if_func_is_true", "Keep the elements for which a predicate is true.", ADD_TO_LIST_IF_FUNC_IS_TRUE),
)

ORIGIN_NAMES: tuple[str, ...] = tuple(origin for origin, _, _, _ in REPLICAS)
