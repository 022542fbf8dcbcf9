/** Minimal scene graph: plain data, serialized to SVG markup on demand. */

export interface SceneNode {
  tag: string;
  attrs: Record<string, string>;
  children: SceneNode[];
  text?: string;
}

export function node(
  tag: string,
  attrs: Record<string, string> = {},
  children: SceneNode[] = [],
  text?: string,
): SceneNode {
  return text === undefined ? { tag, attrs, children } : { tag, attrs, children, text };
}

const ESCAPES: Record<string, string> = {
  "&": "&amp;",
  "<": "&lt;",
  ">": "&gt;",
  '"': "&quot;",
};

function escapeXml(value: string): string {
  return value.replace(/[&<>"]/g, (ch) => ESCAPES[ch] as string);
}

export function serialize(root: SceneNode): string {
  const attrs = Object.entries(root.attrs)
    .map(([k, v]) => ` ${k}="${escapeXml(v)}"`)
    .join("");
  const inner =
    (root.text !== undefined ? escapeXml(root.text) : "") +
    root.children.map(serialize).join("");
  return `<${root.tag}${attrs}>${inner}</${root.tag}>`;
}
