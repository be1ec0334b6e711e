#!/usr/bin/env python3
"""Regenerate the bundled synthetic benchmark dumps.

Writes data/trains.sql and data/mutagenesis_188.sql.  Both are deterministic:
rerunning this script reproduces the committed files byte for byte.
"""

import argparse
import pathlib
import random


def batched_inserts(table, rows, batch=500):
    out = []
    for start in range(0, len(rows), batch):
        chunk = rows[start:start + batch]
        values = ",\n  ".join("(%s)" % ", ".join(chunk_row) for chunk_row in chunk)
        out.append(f"INSERT INTO {table} VALUES\n  {values};\n")
    return "".join(out)


def quote(s):
    return "'" + s.replace("'", "''") + "'"


def gen_trains():
    """Twenty trains in the classic east/west shape.

    A train runs east exactly when it has at least one short car with a
    non-"none" roof; west trains may have short cars, but those are open.
    """
    rng = random.Random(20260815)
    shapes = ["rectangle", "bucket", "hexagon", "u-shaped", "ellipse"]
    roofs = ["flat", "peaked", "jagged", "arc"]

    train_rows, car_rows, load_rows = [], [], []
    car_id, load_id = 0, 0
    directions = ["east", "west"] * 10
    rng.shuffle(directions)
    for train_id, direction in enumerate(directions, start=1):
        east = direction == "east"
        train_rows.append([str(train_id), quote(direction)])
        n_cars = rng.randint(2, 4)
        closed_short_at = rng.randrange(n_cars) if east else -1
        for pos in range(n_cars):
            car_id += 1
            shape = rng.choice(shapes)
            if pos == closed_short_at:
                length, roof = "short", "peaked"
            else:
                length = rng.choice(["short", "long"])
                if length == "short":
                    roof = "none"  # short cars are only closed on east trains
                else:
                    roof = rng.choice(roofs + ["none"])
            wheels = rng.choice([2, 3])
            car_rows.append([str(car_id), str(train_id), str(pos + 1), quote(shape),
                             quote(length), quote(roof), str(wheels)])
            for _ in range(rng.randint(0, 2)):
                load_id += 1
                # Cargo correlates with the direction without determining it.
                if rng.random() < 0.8:
                    load_shape = "triangle" if east else "circle"
                else:
                    load_shape = rng.choice(["rectangle", "diamond"])
                load_rows.append([str(load_id), str(car_id), quote(load_shape),
                                  str(rng.randint(1, 3))])

    sql = [
        "-- Twenty synthetic east/west trains with cars and loads.\n",
        "CREATE TABLE train (\n",
        "  id INTEGER PRIMARY KEY,\n",
        "  direction VARCHAR(8)\n",
        ");\n",
        "CREATE TABLE car (\n",
        "  id INTEGER PRIMARY KEY,\n",
        "  train_id INTEGER,\n",
        "  position INTEGER,\n",
        "  shape VARCHAR(16),\n",
        "  length VARCHAR(8),\n",
        "  roof VARCHAR(16),\n",
        "  wheels INTEGER,\n",
        "  FOREIGN KEY (train_id) REFERENCES train(id)\n",
        ");\n",
        "CREATE TABLE load (\n",
        "  id INTEGER PRIMARY KEY,\n",
        "  car_id INTEGER,\n",
        "  load_shape VARCHAR(16),\n",
        "  load_count INTEGER,\n",
        "  FOREIGN KEY (car_id) REFERENCES car(id)\n",
        ");\n",
        batched_inserts("train", train_rows),
        batched_inserts("car", car_rows),
        batched_inserts("load", load_rows),
    ]
    return "".join(sql)


def spread(total, count, rng, lo, hi):
    """Random per-item counts in [lo, hi] that sum exactly to `total`."""
    counts = [rng.randint(lo, hi) for _ in range(count)]
    i = 0
    while sum(counts) != total:
        delta = 1 if sum(counts) < total else -1
        trial = counts[i % count] + delta
        if lo <= trial <= hi:
            counts[i % count] = trial
        i += 1
    return counts


def weighted(rng, pairs):
    return rng.choices([p[0] for p in pairs], weights=[p[1] for p in pairs])[0]


def gen_mutagenesis():
    """A mutagenesis-shaped benchmark: 188 molecules (125 mutagenic),
    4893 atoms, 5243 bonds, with class-dependent attribute distributions."""
    rng = random.Random(188)
    n_yes, n_no = 125, 63
    labels = ["yes"] * n_yes + ["no"] * n_no
    rng.shuffle(labels)
    n_mol = len(labels)

    atom_counts = spread(4893, n_mol, rng, 15, 38)
    bond_counts = spread(5243, n_mol, rng, 16, 40)

    yes_elements = [("c", 48), ("n", 14), ("o", 13), ("h", 14), ("cl", 6), ("f", 3),
                    ("s", 1), ("br", 1)]
    no_elements = [("c", 45), ("n", 10), ("o", 17), ("h", 17), ("cl", 3), ("f", 1),
                   ("s", 4), ("br", 3)]
    # Same 1..18 type vocabulary for both classes, shifted weights.
    yes_atypes = list(range(1, 19))
    yes_atype_w = [6, 6, 5, 5, 5, 4, 4, 4, 3, 3, 3, 2, 2, 2, 1, 1, 1, 1]
    no_atype_w = list(reversed(yes_atype_w))

    mol_rows, atom_rows, bond_rows = [], [], []
    atom_id = 0
    bond_id = 0
    for mol_id in range(1, n_mol + 1):
        label = labels[mol_id - 1]
        yes = label == "yes"
        ind1 = 1 if rng.random() < (0.72 if yes else 0.15) else 0
        lumo = rng.gauss(-2.1, 0.9) if yes else rng.gauss(-1.1, 0.9)
        logp = rng.gauss(3.2, 1.1) if yes else rng.gauss(2.3, 1.1)
        mol_rows.append([str(mol_id), str(ind1), "%.4f" % lumo, "%.4f" % logp,
                         quote(label)])

        first_atom = atom_id + 1
        for _ in range(atom_counts[mol_id - 1]):
            atom_id += 1
            element = weighted(rng, yes_elements if yes else no_elements)
            atype = rng.choices(yes_atypes,
                                weights=yes_atype_w if yes else no_atype_w)[0]
            charge = rng.gauss(-0.04, 0.11) if yes else rng.gauss(0.04, 0.11)
            atom_rows.append([str(atom_id), str(mol_id), quote(element), str(atype),
                              "%.4f" % charge])
        last_atom = atom_id

        for b in range(bond_counts[mol_id - 1]):
            bond_id += 1
            if first_atom + b < last_atom:
                a1, a2 = first_atom + b, first_atom + b + 1  # backbone path
            else:
                a1 = rng.randint(first_atom, last_atom - 1)
                a2 = rng.randint(a1 + 1, last_atom)
            btype = weighted(rng, [(7, 45), (1, 30), (2, 25)] if yes else
                             [(1, 40), (2, 35), (7, 25)])
            bond_rows.append([str(bond_id), str(a1), str(a2), str(btype)])

    sql = [
        "-- Synthetic mutagenesis-shaped benchmark: 188 molecules, 4893 atoms,\n",
        "-- 5243 bonds; 125 molecules are mutagenic.\n",
        "CREATE TABLE molecule (\n",
        "  molecule_id INTEGER PRIMARY KEY,\n",
        "  ind1 INTEGER,\n",
        "  lumo DOUBLE,\n",
        "  logp DOUBLE,\n",
        "  mutagenic VARCHAR(4)\n",
        ");\n",
        "CREATE TABLE atom (\n",
        "  atom_id INTEGER PRIMARY KEY,\n",
        "  molecule_id INTEGER,\n",
        "  element VARCHAR(4),\n",
        "  atype INTEGER,\n",
        "  charge DOUBLE,\n",
        "  FOREIGN KEY (molecule_id) REFERENCES molecule(molecule_id)\n",
        ");\n",
        "CREATE TABLE bond (\n",
        "  bond_id INTEGER PRIMARY KEY,\n",
        "  atom1_id INTEGER,\n",
        "  atom2_id INTEGER,\n",
        "  btype INTEGER,\n",
        "  FOREIGN KEY (atom1_id) REFERENCES atom(atom_id),\n",
        "  FOREIGN KEY (atom2_id) REFERENCES atom(atom_id)\n",
        ");\n",
        batched_inserts("molecule", mol_rows),
        batched_inserts("atom", atom_rows),
        batched_inserts("bond", bond_rows),
    ]
    return "".join(sql)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "data"))
    args = parser.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "trains.sql").write_text(gen_trains())
    (out / "mutagenesis_188.sql").write_text(gen_mutagenesis())
    print("wrote", out / "trains.sql")
    print("wrote", out / "mutagenesis_188.sql")


if __name__ == "__main__":
    main()
