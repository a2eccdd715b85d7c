"""Integer lattices: echelon bases, coset representatives and Smith normal form.

Small exact routines on Python ints; matrices are lists of row lists.
"""
from __future__ import annotations


def _xgcd(a: int, b: int):
    """(g, s, t) with g = s*a + t*b = gcd(a, b) >= 0."""
    s0, s1, t0, t1 = 1, 0, 0, 1
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    if a < 0:
        a, s0, t0 = -a, -s0, -t0
    return a, s0, t0


def echelon_basis(rows, ncols: int) -> list:
    """Row-echelon (Hermite) basis of the lattice spanned by ``rows``.

    Pivots are positive, strictly increasing in column, and entries above a
    pivot are reduced into [0, pivot).
    """
    rows = [list(map(int, r)) for r in rows if any(r)]
    basis = []
    col = 0
    while rows and col < ncols:
        nz = [r for r in rows if r[col] != 0]
        rest = [r for r in rows if r[col] == 0]
        if not nz:
            col += 1
            continue
        piv = nz[0]
        for r in nz[1:]:
            g, s, t = _xgcd(piv[col], r[col])
            a, b = piv[col] // g, r[col] // g
            new_piv = [s * x + t * y for x, y in zip(piv, r)]
            other = [b * x - a * y for x, y in zip(piv, r)]
            # other has zero in this column by construction (b*piv - a*r)
            piv = new_piv
            if any(other):
                rest.append(other)
        if piv[col] < 0:
            piv = [-x for x in piv]
        basis.append((col, piv))
        rows = [r for r in rest if any(r)]
        col += 1
    # reduce entries above pivots
    for i in range(len(basis)):
        ci, ri = basis[i]
        for j in range(i):
            cj, rj = basis[j]
            q = rj[ci] // ri[ci]
            if q:
                basis[j] = (cj, [x - q * y for x, y in zip(rj, ri)])
    return basis


def coset_rep(v, basis) -> tuple:
    """Canonical representative of v modulo the lattice with echelon ``basis``."""
    v = list(v)
    for col, row in basis:
        q = v[col] // row[col]
        if q:
            v = [x - q * y for x, y in zip(v, row)]
    return tuple(v)


def in_lattice(v, basis) -> bool:
    return not any(coset_rep(v, basis))


def lattice_coords(v, gens):
    """Integer c with sum c_i gens_i = v, or None (small exact search by SNF)."""
    if not gens:
        return () if not any(v) else None
    # columns = generators
    m = [[g[i] for g in gens] for i in range(len(v))]
    sol = solve_integer(m, list(v))
    if sol is None:
        return None
    return tuple(sol[0])


def identity(n):
    return [[int(i == j) for j in range(n)] for i in range(n)]


def matmul(a, b):
    return [[sum(a[i][k] * b[k][j] for k in range(len(b))) for j in range(len(b[0]) if b else 0)]
            for i in range(len(a))]


def smith_normal_form(m):
    """Return (U, D, V) with U*m*V = D diagonal, U and V unimodular.

    Diagonal entries are nonnegative and each divides the next.
    """
    rows = len(m)
    cols = len(m[0]) if rows else 0
    d = [list(map(int, r)) for r in m]
    u = identity(rows)
    v = identity(cols)

    def swap_rows(i, j):
        d[i], d[j] = d[j], d[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for r in d:
            r[i], r[j] = r[j], r[i]
        for r in v:
            r[i], r[j] = r[j], r[i]

    t = 0
    while t < min(rows, cols):
        # pick a nonzero entry of minimal absolute value in the submatrix
        best = None
        for i in range(t, rows):
            for j in range(t, cols):
                if d[i][j] and (best is None or abs(d[i][j]) < abs(d[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        swap_rows(t, best[0])
        swap_cols(t, best[1])
        done = False
        while not done:
            done = True
            p = d[t][t]
            for i in range(t + 1, rows):
                q = d[i][t] // p
                if q:
                    d[i] = [x - q * y for x, y in zip(d[i], d[t])]
                    u[i] = [x - q * y for x, y in zip(u[i], u[t])]
            for j in range(t + 1, cols):
                q = d[t][j] // p
                if q:
                    for r in d:
                        r[j] -= q * r[t]
                    for r in v:
                        r[j] -= q * r[t]
            # any remainder smaller than the pivot becomes the new pivot
            for i in range(t + 1, rows):
                if d[i][t]:
                    swap_rows(t, i)
                    done = False
                    break
            if done:
                for j in range(t + 1, cols):
                    if d[t][j]:
                        swap_cols(t, j)
                        done = False
                        break
            if done:
                # divisibility: pivot must divide the rest of the submatrix
                for i in range(t + 1, rows):
                    for j in range(t + 1, cols):
                        if d[i][j] % d[t][t]:
                            d[t] = [x + y for x, y in zip(d[t], d[i])]
                            u[t] = [x + y for x, y in zip(u[t], u[i])]
                            done = False
                            break
                    if not done:
                        break
        if d[t][t] < 0:
            d[t] = [-x for x in d[t]]
            u[t] = [-x for x in u[t]]
        t += 1
    return u, d, v


def solve_integer(a, b):
    """Integer solutions of a x = b.

    Returns None if there are none, else (x0, kernel) where every solution is
    x0 + sum n_i kernel_i with n_i integers.
    """
    rows = len(a)
    cols = len(a[0]) if rows else 0
    if cols == 0:
        return ((), []) if not any(b) else None
    u, d, v = smith_normal_form(a)
    c = [sum(u[i][k] * b[k] for k in range(rows)) for i in range(rows)]
    y = [0] * cols
    rank = 0
    for i in range(min(rows, cols)):
        if d[i][i]:
            rank += 1
    for i in range(rows):
        di = d[i][i] if i < cols else 0
        if di == 0:
            if c[i] != 0:
                return None
        else:
            if c[i] % di:
                return None
            y[i] = c[i] // di
    x0 = [sum(v[i][j] * y[j] for j in range(cols)) for i in range(cols)]
    kernel = [[v[i][j] for i in range(cols)] for j in range(rank, cols)]
    return x0, kernel
