"""
Pure conditions over spatial atoms: emptiness, address, collision,
well-formedness, allocation and the matching-step table.

    S             S'             update      check
    next(x,y)     next(x',z)     emp         y = z
    next(x,y)     lseg(x',z)     lseg(y,z)   true
    lseg(x,y)     next(x',z)     emp         false
    lseg(x,y)     lseg(x',z)     lseg(y,z)   y != z -> Alloc(Sigma_I, z)
"""

from typing import List

from formulas import (FALSE, TRUE, Emp, Implies, Lseg, Next, PureFormula, SpatialAtom,
                      SpatialConj, Term, conjoin, disjoin, eq, negate, neq)


class EngineError(Exception):
    pass


class NoAddressError(EngineError):
    pass


class EmptyAtomError(EngineError):
    pass


def empty_cond(atom: SpatialAtom) -> PureFormula:
    if isinstance(atom, Emp):
        return TRUE
    if isinstance(atom, Next):
        return FALSE
    return eq(atom.src, atom.dst)


def nonempty_cond(atom: SpatialAtom) -> PureFormula:
    if isinstance(atom, Emp):
        return FALSE
    if isinstance(atom, Next):
        return TRUE
    if atom.src == atom.dst:
        return FALSE
    return neq(atom.src, atom.dst)


def addr(atom: SpatialAtom) -> Term:
    if isinstance(atom, Emp):
        raise NoAddressError("emp has no address")
    return atom.src


def _same(a: Term, b: Term) -> PureFormula:
    return TRUE if a == b else eq(a, b)


def collide(s1: SpatialAtom, s2: SpatialAtom) -> PureFormula:
    """Both atoms non-empty and at the same address."""
    if isinstance(s1, Emp) or isinstance(s2, Emp):
        return FALSE
    return conjoin([nonempty_cond(s1), nonempty_cond(s2), _same(addr(s1), addr(s2))])


def well_formed(sigma: SpatialConj) -> PureFormula:
    atoms = sigma.atoms
    return conjoin(negate(collide(atoms[i], atoms[j]))
                   for i in range(len(atoms)) for j in range(i + 1, len(atoms)))


def alloc(sigma: SpatialConj, x: Term) -> PureFormula:
    """Some non-empty atom of sigma sits at address x."""
    return disjoin(conjoin([nonempty_cond(atom), _same(x, addr(atom))])
                   for atom in sigma if not isinstance(atom, Emp))


def _check_kinds(s: SpatialAtom, s_prime: SpatialAtom):
    if isinstance(s, Emp) or isinstance(s_prime, Emp):
        raise EmptyAtomError("the matching-step table has no row for emp")


def unfold_update(s: SpatialAtom, s_prime: SpatialAtom) -> SpatialConj:
    """Surplus of S' left once S is consumed; emp is the empty conjunction."""
    _check_kinds(s, s_prime)
    if isinstance(s_prime, Next):
        return SpatialConj()
    return SpatialConj((Lseg(s.dst, s_prime.dst),))


def unfold_step(s: SpatialAtom, s_prime: SpatialAtom) -> SpatialConj:
    return unfold_update(s, s_prime)


def unfold_check(sigma_i: SpatialConj, s: SpatialAtom, s_prime: SpatialAtom) -> PureFormula:
    _check_kinds(s, s_prime)
    y, z = s.dst, s_prime.dst
    if isinstance(s, Next):
        return eq(y, z) if isinstance(s_prime, Next) else TRUE
    if isinstance(s_prime, Next):
        return FALSE
    return Implies(neq(y, z), alloc(sigma_i, z))


def match_guard(sigma_i: SpatialConj, s: SpatialAtom, s_prime: SpatialAtom) -> PureFormula:
    c = collide(s, s_prime)
    if c == FALSE:
        return FALSE
    return conjoin([c, unfold_check(sigma_i, s, s_prime)])


def nonempty_atoms(sigma: SpatialConj) -> List[SpatialAtom]:
    return [a for a in sigma if not isinstance(a, Emp)]
