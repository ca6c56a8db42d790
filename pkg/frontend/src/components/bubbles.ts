/** Message bubbles and quick-reply buttons.
 *
 * Two variants: user (right) and bot (left). A bot bubble may carry at most
 * one attachment node below its text. Quick replies render as buttons; a
 * click disables the set and hands the label to the callback verbatim.
 */

import { el } from './dom.js';
import type { Author } from '../types.js';

export interface BubbleOptions {
  attachmentNode?: HTMLElement;
  quickReplies?: string[];
  onQuickReply?: (label: string) => void;
}

export function createBubble(author: Author, text: string, options: BubbleOptions = {}): HTMLDivElement {
  const bubble = el('div', `msg msg--${author}`);
  bubble.appendChild(el('div', 'msg-text', text));

  if (options.attachmentNode) {
    bubble.appendChild(options.attachmentNode);
  }

  const labels = options.quickReplies ?? [];
  if (labels.length && options.onQuickReply) {
    const row = el('div', 'quick-replies');
    for (const label of labels) {
      const button = el('button', 'quick-reply', label);
      button.type = 'button';
      button.addEventListener('click', () => {
        for (const b of row.querySelectorAll<HTMLButtonElement>('.quick-reply')) {
          b.disabled = true;
        }
        button.classList.add('quick-reply--chosen');
        options.onQuickReply!(label);
      });
      row.appendChild(button);
    }
    bubble.appendChild(row);
  }
  return bubble;
}

export function createErrorBubble(text: string): HTMLDivElement {
  const bubble = el('div', 'msg msg--error');
  bubble.appendChild(el('div', 'msg-text', text));
  return bubble;
}
