def _meaningful_lines(path):
    wo_crlf = (i.rstrip('\r\n') for i in open(path).readlines())
    # filter out empty lines and comments
    return [i.strip() for i in wo_crlf if i.strip() and not i.strip().startswith('#')]


def key_value_file(path):
    """ Parses a plain "key = value" file into a dict

    One pair per line; empty lines and "#" comments are ignored. Keys are
    lower-cased and dashes turned into underscores, so that "prime-bits"
    and "prime_bits" are the same key.

    :param path: the file path, relative to the current directory if not
                 absolute
    :return: a dict of str to str
    :raises ValueError: on a line without "="
    """
    pairs = {}
    for line in _meaningful_lines(path):
        if '=' not in line:
            raise ValueError('Invalid line in {} : "{}"'.format(path, line))
        key, value = line.split('=', 1)
        pairs[key.strip().lower().replace('-', '_')] = value.strip()
    return pairs
