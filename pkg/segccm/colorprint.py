# Following are the ANSI octal escape sequences for different formatting

OKGREEN = "\033[92m"
WARNING = "\033[93m"
FAIL = "\033[91m"

BOLD = "\033[1m"

# Nothing (Standard)
ENDC = "\033[0m"


def colorprint(color, s):
    """Formats the string 's' with the ANSI escape sequence(s) 'color',
    prints it and resets the formatting afterwards.

    Args:
        color: ANSI escape sequence(s) to be used for formatting.
        s: The string to be formatted.

    Returns:
        The formatted string

    """
    output = "{}{}{}".format(color, s, ENDC)
    print(output)
    return output


def verdict_color(verdict):
    """ Green when any causal direction was detected, red otherwise """
    return FAIL if verdict == "none" else OKGREEN


def row_color(passed):
    return OKGREEN if passed else FAIL
