"""Constructors for the concrete transducers used throughout the package."""

from .fst import EPS, Fst, FstError, _escape, _unescape

BASES = "TCAG"
# standard genetic code, codons enumerated in TCAG order
AMINO = "FFLLSSSSYY**CC*WLLLLPPPPHHQQRRRRIIIMTTTTNNKKSSRRVVVVAAAADDEEGGGG"
CODONS = {a + b + c: AMINO[16 * i + 4 * j + k]
          for i, a in enumerate(BASES) for j, b in enumerate(BASES) for k, c in enumerate(BASES)}
AMINO_ALPHABET = tuple("ARNDCQEGHILKMFPSTVWYBZ*")


def build_identity(alphabet):
    alphabet = tuple(alphabet)
    return Fst(1, [0], [0], [(0, a, a, 0) for a in alphabet], alphabet, alphabet)


def build_lowercase(pairs=(("A", "a"), ("B", "b")), copies=None):
    """One state; ``upper -> lower`` for each pair and copies of the lower
    symbols (or of ``copies`` when given)."""
    pairs = tuple(pairs)
    if copies is None:
        copies = tuple(dict.fromkeys(lo for _, lo in pairs))
    arcs = [(0, up, lo, 0) for up, lo in pairs] + [(0, c, c, 0) for c in copies]
    ins = tuple(dict.fromkeys([up for up, _ in pairs] + list(copies)))
    outs = tuple(dict.fromkeys([lo for _, lo in pairs] + list(copies)))
    return Fst(1, [0], [0], arcs, ins, outs)


def build_dna2aa():
    """Codon translation: two silent arcs per codon, the third emits the amino
    acid (``*`` for stop codons). Every state accepts, so a trailing partial
    codon is read without output."""
    nucleotides = ("A", "C", "G", "T")
    first = {a: 1 + i for i, a in enumerate(nucleotides)}
    second = {a + b: 5 + 4 * i + j for i, a in enumerate(nucleotides) for j, b in enumerate(nucleotides)}
    arcs = [(0, a, EPS, first[a]) for a in nucleotides]
    arcs += [(first[a], b, EPS, second[a + b]) for a in nucleotides for b in nucleotides]
    arcs += [(second[a + b], c, CODONS[a + b + c], 0)
             for a in nucleotides for b in nucleotides for c in nucleotides]
    return Fst(21, [0], range(21), arcs, nucleotides, AMINO_ALPHABET)


def translate(dna):
    """Reference codon translation (no automata)."""
    return "".join(CODONS[dna[i:i + 3]] for i in range(0, len(dna) - len(dna) % 3, 3))


def build_newspeak(alphabet=("a", "b", "d")):
    """Rewrite every occurrence of ``bad`` as ``ungood``, copy the rest.

    Each ``b`` is either copied, in which case ``ad`` may not follow, or
    guessed to start ``bad``, in which case ``ungood`` is emitted while the
    rest of the word is checked.
    """
    alphabet = tuple(alphabet)
    if not {"a", "b", "d"} <= set(alphabet):
        raise FstError("newspeak needs a, b and d in the alphabet")
    outs = alphabet + tuple(c for c in "ungo" if c not in alphabet)
    idle, copied_b, copied_ba, guess_b, guess_ba, emit_g, emit_o1, emit_o2 = range(8)
    arcs = []
    for state in (idle, copied_b, copied_ba):
        for c in alphabet:
            if c == "b":
                arcs.append((state, "b", "b", copied_b))
                arcs.append((state, "b", "u", guess_b))
            elif c == "a" and state == copied_b:
                arcs.append((state, "a", "a", copied_ba))
            elif c == "d" and state == copied_ba:
                continue
            else:
                arcs.append((state, c, c, idle))
    arcs += [
        (guess_b, "a", "n", guess_ba),
        (guess_ba, "d", "g", emit_g),
        (emit_g, EPS, "o", emit_o1),
        (emit_o1, EPS, "o", emit_o2),
        (emit_o2, EPS, "d", idle),
    ]
    return Fst(8, [idle], [idle, copied_b, copied_ba], arcs, alphabet, outs)


def build_safety_showcase():
    """Four states, one per way of being safe: ``a->a``, ``aa->aa`` followed by
    an absorbing silent loop, ``ab->ad`` and ``b->b``."""
    arcs = [
        (0, "a", "a", 1),
        (0, "b", "b", 2),
        (1, "a", "a", 3),
        (1, "b", "d", 2),
        (3, "a", EPS, 3),
        (3, "b", EPS, 3),
    ]
    return Fst(4, [0], [1, 2, 3], arcs, ("a", "b"), ("a", "b", "d"))


def build_token_to_byte(vocab):
    """Hub-and-chain machine spelling each token as its characters.

    ``vocab`` is a sequence of ``(token, spelling)``; the hub reads a token and
    emits its first character, the remaining characters follow on
    epsilon-input arcs back to the hub.
    """
    vocab = [(tok, tuple(sp)) for tok, sp in vocab]
    if not vocab:
        raise FstError("empty vocabulary")
    tokens = [tok for tok, _ in vocab]
    if len(set(tokens)) != len(tokens):
        raise FstError("duplicate token id")
    arcs = []
    n = 1
    for tok, sp in vocab:
        if not sp:
            raise FstError(f"token {tok!r} has an empty spelling")
        src, label = 0, tok
        for c in sp[:-1]:
            arcs.append((src, label, c, n))
            src, label = n, EPS
            n += 1
        arcs.append((src, label, sp[-1], 0))
    outs = tuple(sorted({c for _, sp in vocab for c in sp}))
    return Fst(n, [0], [0], arcs, tuple(tokens), outs)


def read_vocab(source):
    """Parse ``id<TAB>spelling`` lines; spellings may use ``\\xNN`` escapes."""
    text = source if isinstance(source, str) else source.read()
    vocab = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        if "\t" not in line:
            raise FstError(f"line {lineno}: expected id<TAB>spelling")
        tok, sp = line.split("\t", 1)
        vocab.append((_unescape(tok), _unescape(sp)))
    return vocab


def write_vocab(vocab):
    return "".join(f"{_escape(tok)}\t{_escape(''.join(sp))}\n" for tok, sp in vocab)


def build_delimiter_segmenter(delims=(" ",), alphabet=("a", "b", " "), sep="␣"):
    """Drop delimiter runs and emit ``sep`` at the start of every word."""
    delims = tuple(delims)
    alphabet = tuple(dict.fromkeys(tuple(alphabet) + delims))
    letters = [c for c in alphabet if c not in delims]
    outs = tuple(letters) + (sep,)
    between, inside = 0, 1
    arcs = [(between, d, EPS, between) for d in delims]
    arcs += [(inside, d, EPS, between) for d in delims]
    for i, c in enumerate(letters):
        mid = 2 + i
        arcs.append((between, c, sep, mid))
        arcs.append((mid, EPS, c, inside))
        arcs.append((inside, c, c, inside))
    return Fst(2 + len(letters), [between], [between, inside], arcs, alphabet, outs)


def segment(text, delims=(" ",), sep="␣"):
    """Reference segmenter (no automata)."""
    words, cur = [], ""
    for ch in text:
        if ch in delims:
            if cur:
                words.append(cur)
            cur = ""
        else:
            cur += ch
    if cur:
        words.append(cur)
    return "".join(sep + w for w in words)


def build_comma_rule(alphabet=("a", "b", "0", "1", ","), sep="SEP"):
    """Insert ``sep`` before a comma unless a digit follows it."""
    alphabet = tuple(alphabet)
    if "," not in alphabet:
        raise FstError("the alphabet needs a comma")
    digits = [c for c in alphabet if c.isdigit()]
    others = [c for c in alphabet if c != "," and not c.isdigit()]
    outs = alphabet + (sep,)
    free, before_digit, pending, after_sep = range(4)
    arcs = []
    for c in alphabet:
        if c != ",":
            arcs.append((free, c, c, free))
    for state in (free, after_sep):
        arcs.append((state, ",", ",", before_digit))
        arcs.append((state, ",", sep, pending))
    arcs += [(before_digit, c, c, free) for c in digits]
    arcs.append((pending, EPS, ",", after_sep))
    arcs += [(after_sep, c, c, free) for c in others]
    return Fst(4, [free], [free, after_sep], arcs, alphabet, outs)


def comma_reference(x, sep="SEP"):
    out = []
    for i, c in enumerate(x):
        if c == "," and not (i + 1 < len(x) and x[i + 1].isdigit()):
            out.append(sep)
        out.append(c)
    return tuple(out)
