"""World renderer, frame-difference event camera and event files."""

from .camera import (EVENT_DTYPE, OFF, ON, CameraEvent, CameraModel, as_event_list,
                     empty_events, from_event_list, generate_events)
from .eventio import EventFileError, load_events, save_events
from .render import BACKGROUND, Scene, SceneSurface, cast_rays, render_frame

__all__ = [
    "EVENT_DTYPE", "OFF", "ON", "CameraEvent", "CameraModel", "as_event_list", "empty_events",
    "from_event_list", "generate_events", "EventFileError", "load_events", "save_events",
    "BACKGROUND", "Scene", "SceneSurface", "cast_rays", "render_frame",
]
