import yaml
from typing import Any

def split_override(override: str) -> tuple[str, Any]:
    # 'ppo.gamma=0.98' -> ('ppo.gamma', 0.98)
    if '=' not in override:
        raise ValueError(f'Override "{override}" is not in the form section.key=value')
    key, raw = override.split('=', 1)
    key = key.strip()
    if not key:
        raise ValueError(f'Override "{override}" has an empty key')
    return key, yaml.safe_load(raw) if raw.strip() else None

def set_dotted(data: dict, key: str, value: Any) -> None:
    """Set data['a']['b'] for key 'a.b', creating intermediate sections."""
    *sections, leaf = key.split('.')
    node = data
    for section in sections:
        child = node.setdefault(section, {})
        if not isinstance(child, dict):
            raise ValueError(f'Override key "{key}": "{section}" is not a section')
        node = child
    node[leaf] = value
