"""
Registry of experiment runs kept next to their outputs
"""

from datetime import datetime
from pathlib import Path

import pandas as pd
from loguru import logger
from sqlalchemy import Column, DateTime, Float, Integer, MetaData, String, Table, create_engine, text

from config import Config


class RunRegistry:
    """Appends one row per run to a SQLite database in the output directory"""

    def __init__(self, output_dir: Path = None, database_url: str = None):
        output_dir = Path(output_dir) if output_dir else Config.BASE_OUTPUT_PATH
        self.database_url = database_url or f"sqlite:///{output_dir / Config.RESULTS_DATABASE}"
        self.engine = create_engine(self.database_url)
        self.metadata = MetaData()
        self._create_tables()

    def _create_tables(self):
        """Create the runs table if it does not exist"""
        self.runs_table = Table(
            "runs",
            self.metadata,
            Column("id", Integer, primary_key=True, autoincrement=True),
            Column("command", String(50)),
            Column("preset", String(50)),
            Column("status", String(20)),
            Column("exit_code", Integer),
            Column("wall_time", Float),
            Column("output_dir", String(500)),
            Column("summary", String(1000)),
            Column("created_at", DateTime, default=datetime.now),
        )
        self.metadata.create_all(self.engine)

    def record_run(
        self,
        command: str,
        preset: str,
        status: str,
        exit_code: int,
        wall_time: float,
        output_dir: str,
        summary: str = "",
    ) -> int:
        """Insert a run; returns the number of rows written"""
        try:
            with self.engine.begin() as conn:
                conn.execute(
                    self.runs_table.insert().values(
                        command=command,
                        preset=preset,
                        status=status,
                        exit_code=exit_code,
                        wall_time=wall_time,
                        output_dir=str(output_dir),
                        summary=summary[:1000],
                        created_at=datetime.now(),
                    )
                )
            return 1
        except Exception as e:
            logger.error(f"Error recording run: {e}")
            return 0

    def list_runs(self, command: str = None) -> pd.DataFrame:
        """Recorded runs, newest first"""
        query = "SELECT * FROM runs"
        params = {}
        if command:
            query += " WHERE command = :command"
            params["command"] = command
        query += " ORDER BY id DESC"
        with self.engine.connect() as conn:
            return pd.read_sql(text(query), conn, params=params)
