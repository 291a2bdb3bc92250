#!/usr/bin/env python3
# Copyright 2026 The CAT Authors.
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Reduces ProPublica's compas-scores-two-years.csv to the six-feature table.

Applies the usual ProPublica row filter and writes age, sex, race,
priors_count, charge_degree, custody_length (days) and recid.
"""

import argparse

import pandas as pd


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("raw", help="compas-scores-two-years.csv")
    parser.add_argument("out", help="output CSV")
    args = parser.parse_args()

    d = pd.read_csv(args.raw)
    d = d[(d.days_b_screening_arrest <= 30) & (d.days_b_screening_arrest >= -30) &
          (d.is_recid != -1) & (d.c_charge_degree != "O") & (d.score_text != "N/A")]
    custody = (pd.to_datetime(d.c_jail_out) - pd.to_datetime(d.c_jail_in)).dt.total_seconds() / 86400.0
    out = pd.DataFrame({
        "age": d.age,
        "sex": d.sex,
        "race": d.race,
        "priors_count": d.priors_count,
        "charge_degree": d.c_charge_degree,
        "custody_length": custody.round(4),
        "recid": d.two_year_recid,
    })
    out.to_csv(args.out, index=False)
    print(f"wrote {len(out)} rows to {args.out}")


if __name__ == "__main__":
    main()
