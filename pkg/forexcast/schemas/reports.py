from pydantic import BaseModel, Field
from typing import List, Optional


class TrainReport(BaseModel):
    """Per-epoch history of one training run"""
    train_loss: List[float] = Field(default_factory=list, description="Scaled-space MSE per epoch")
    val_loss: List[float] = Field(default_factory=list, description="Validation MSE per epoch, if any")
    epochs_run: int = Field(0, ge=0)
    stopped_early: bool = False
    best_epoch: Optional[int] = Field(None, description="1-based epoch whose parameters were kept")
    wall_time: float = Field(0.0, ge=0, description="Seconds spent training")

    @property
    def final_train_loss(self) -> Optional[float]:
        return self.train_loss[-1] if self.train_loss else None

    @property
    def final_val_loss(self) -> Optional[float]:
        return self.val_loss[-1] if self.val_loss else None


class EvalReport(BaseModel):
    """Price-space metrics of one model on one test split"""
    model_label: str
    dataset_label: str
    n: int = Field(..., ge=1, description="Test samples")
    mse: float = Field(..., ge=0)
    rmse: float = Field(..., ge=0)
    r_square: Optional[float] = Field(None, le=1, description="None when the test variance is degenerate")
