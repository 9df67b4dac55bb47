from datetime import datetime

from sqlalchemy import Column, DateTime, Float, ForeignKey, Integer, String, Text
from sqlalchemy.orm import declarative_base, relationship

Base = declarative_base()


class SweepRun(Base):
    __tablename__ = "sweep_runs"

    id = Column(Integer, primary_key=True, index=True)
    kind = Column(String, index=True)  # snr, n_rf
    preset = Column(String)
    seed = Column(Integer)
    config_json = Column(Text)  # fully resolved ExperimentConfig
    csv_path = Column(String)
    created_at = Column(DateTime, default=datetime.utcnow)

    points = relationship("SweepPoint", back_populates="run", cascade="all, delete-orphan")


class SweepPoint(Base):
    __tablename__ = "sweep_points"

    id = Column(Integer, primary_key=True, index=True)
    run_id = Column(Integer, ForeignKey("sweep_runs.id"), index=True)
    scheme = Column(String, index=True)
    snr_db = Column(Float)
    n_rf = Column(Integer)
    blocks = Column(Integer)
    bits = Column(Integer)
    errors = Column(Integer)
    ber = Column(Float)
    mse = Column(Float)
    papr_p50_db = Column(Float)
    papr_p99_db = Column(Float)

    run = relationship("SweepRun", back_populates="points")
