import json
import logging
from contextlib import contextmanager
from typing import Any, Dict, Iterator, Optional

import pandas as pd
from sqlalchemy import create_engine
from sqlalchemy.orm import Session, sessionmaker

from schbf import config
from schbf.exceptions import ConfigurationError
from schbf.models import Base, SweepPoint, SweepRun

logger = logging.getLogger(__name__)


def _resolve_url(url: Optional[str]) -> str:
    url = url or config.DATABASE_URL
    if not url:
        raise ConfigurationError("no database URL given (use --db or SCHBF_DATABASE_URL)")
    return url


def _native(value):
    # sqlite cannot bind numpy scalars
    return value.item() if hasattr(value, "item") else value


def get_engine(url: Optional[str] = None):
    url = _resolve_url(url)
    connect_args = {"check_same_thread": False} if url.startswith("sqlite") else {}
    return create_engine(url, connect_args=connect_args)


def create_tables(engine) -> None:
    Base.metadata.create_all(bind=engine)


@contextmanager
def get_database(url: Optional[str] = None) -> Iterator[Session]:
    engine = get_engine(url)
    create_tables(engine)
    session_factory = sessionmaker(autocommit=False, autoflush=False, bind=engine)
    db = session_factory()
    try:
        yield db
    finally:
        db.close()
        engine.dispose()


def record_sweep(
    table: pd.DataFrame, kind: str, resolved_config: Dict[str, Any],
    csv_path: Optional[str] = None, url: Optional[str] = None,
) -> int:
    """Store one sweep and its rows; returns the new run id."""
    with get_database(url) as db:
        run = SweepRun(
            kind=kind,
            preset=resolved_config.get("name"),
            seed=resolved_config.get("seed"),
            config_json=json.dumps(resolved_config, sort_keys=True),
            csv_path=csv_path,
        )
        for row in table.to_dict(orient="records"):
            run.points.append(SweepPoint(**{key: _native(row[key]) for key in config.CSV_COLUMNS}))
        db.add(run)
        db.commit()
        db.refresh(run)
        logger.info("recorded %s sweep as run %d (%d points)", kind, run.id, len(table))
        return run.id


def load_sweep(run_id: int, url: Optional[str] = None) -> pd.DataFrame:
    """Rows of a stored sweep in CSV column order."""
    with get_database(url) as db:
        points = db.query(SweepPoint).filter(SweepPoint.run_id == run_id).order_by(SweepPoint.id).all()
        return pd.DataFrame(
            [{key: getattr(point, key) for key in config.CSV_COLUMNS} for point in points],
            columns=config.CSV_COLUMNS,
        )
