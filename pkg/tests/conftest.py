from __future__ import annotations

import pytest

from sqlaudit.corpus import Corpus
from sqlaudit.data import MINI_DATABASES, MINI_EXAMPLES, MINI_SCHEMAS, load_mini_corpus
from sqlaudit.schema import Column, DbSchema, ForeignKey, Table


@pytest.fixture(scope="session")
def mini_corpus() -> Corpus:
    return load_mini_corpus()


@pytest.fixture(scope="session")
def mini_paths():
    return MINI_EXAMPLES, MINI_SCHEMAS, MINI_DATABASES


@pytest.fixture(scope="session")
def stadium_schema(mini_corpus) -> DbSchema:
    return mini_corpus.schemas["stadium_league"]


@pytest.fixture(scope="session")
def district_schema(mini_corpus) -> DbSchema:
    return mini_corpus.schemas["district_mini"]


@pytest.fixture(scope="session")
def world_schema(mini_corpus) -> DbSchema:
    return mini_corpus.schemas["world_mini"]


@pytest.fixture(scope="session")
def car_schema() -> DbSchema:
    """Maker/FullName shape: two name columns that can answer the same question."""
    return DbSchema(
        database_id="car_1",
        tables=[
            Table(
                name="car_makers",
                columns=[
                    Column("id", "integer"),
                    Column("maker", "text"),
                    Column("fullname", "text"),
                    Column("country", "text"),
                ],
                primary_key=("id",),
            ),
            Table(
                name="model_list",
                columns=[
                    Column("model_id", "integer"),
                    Column("maker", "integer"),
                    Column("model", "text"),
                ],
                primary_key=("model_id",),
                foreign_keys=[
                    ForeignKey(columns=("maker",), ref_table="car_makers", ref_columns=("id",))
                ],
            ),
        ],
    )


@pytest.fixture(scope="session")
def person_schema() -> DbSchema:
    return DbSchema(
        database_id="people",
        tables=[
            Table(
                name="person",
                columns=[
                    Column("id", "integer"),
                    Column("name", "text"),
                    Column("nationality", "text"),
                ],
                primary_key=("id",),
            )
        ],
    )
